//! Exact spectral time evolution, transfer amplitudes, input-averaged
//! fidelity, and the maximum-fidelity search over the protocol window.
//!
//! Evolution goes through the eigendecomposition rather than a time stepper:
//! f_{i←j}(t) = |Σ_k ⟨i|E_k⟩⟨j|E_k⟩ e^(−iE_k t)| is exact for arbitrary t at
//! O(M) cost per evaluation once the per-k products are in hand.

use std::io::Write;

use crate::error::{Error, Result};
use crate::hamiltonian::ChainSpec;
use crate::spectral::EigenSystem;

/// Default fidelity-search window, in units of the noiseless transfer time τ.
pub const DEFAULT_WINDOW_MULT: f64 = 20.0;
/// Default coarse-grid density per τ. The Rabi envelope has angular
/// frequency √(4J'²+Δ²) ~ O(g²), so 2000 points per τ oversamples each
/// envelope period by more than 10³.
pub const DEFAULT_COARSE_PER_TAU: usize = 2000;

/// Grid scans re-synchronize the rotating phasors against an exact
/// evaluation every this many steps, bounding accumulated rounding drift
/// below ~1e-12.
const SCAN_RESYNC: usize = 4096;

/// Transition amplitude between two fixed sites, precomputed for repeated
/// evaluation at many times.
pub struct TransitionAmplitude {
    energies: Vec<f64>,
    products: Vec<f64>,
}

impl TransitionAmplitude {
    pub fn new(eigs: &EigenSystem, from: usize, to: usize) -> Self {
        let products = eigs
            .vectors
            .iter()
            .map(|v| v[from] * v[to])
            .collect();
        TransitionAmplitude {
            energies: eigs.energies.clone(),
            products,
        }
    }

    /// Sender-to-receiver amplitude for a full-system decomposition.
    pub fn sender_to_receiver(eigs: &EigenSystem, spec: &ChainSpec) -> Self {
        TransitionAmplitude::new(eigs, spec.sender_index(), spec.receiver_index())
    }

    /// |Σ_k p_k e^(−iE_k t)|, evaluated exactly.
    pub fn eval(&self, t: f64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (e, p) in self.energies.iter().zip(&self.products) {
            let (s, c) = (e * t).sin_cos();
            re += p * c;
            im -= p * s;
        }
        re.hypot(im)
    }

    /// Evaluate on the uniform grid t = t0 + i·dt for i in 0..count and
    /// return (argmax t, max amplitude).
    ///
    /// Uses one complex rotation per eigenvalue per step instead of fresh
    /// trigonometry, with periodic exact re-synchronization.
    pub fn scan_max(&self, t0: f64, dt: f64, count: usize) -> (f64, f64) {
        let m = self.energies.len();
        let mut rot_re = Vec::with_capacity(m);
        let mut rot_im = Vec::with_capacity(m);
        for &e in &self.energies {
            let (s, c) = (e * dt).sin_cos();
            rot_re.push(c);
            rot_im.push(-s);
        }
        let mut ph_re = vec![0.0; m];
        let mut ph_im = vec![0.0; m];

        let mut best_t = t0;
        let mut best_f = f64::NEG_INFINITY;
        for i in 0..count {
            let t = t0 + i as f64 * dt;
            if i % SCAN_RESYNC == 0 {
                for (k, &e) in self.energies.iter().enumerate() {
                    let (s, c) = (e * t).sin_cos();
                    ph_re[k] = c;
                    ph_im[k] = -s;
                }
            }
            let (mut re, mut im) = (0.0, 0.0);
            for k in 0..m {
                re += self.products[k] * ph_re[k];
                im += self.products[k] * ph_im[k];
            }
            let f = re.hypot(im);
            if f > best_f {
                best_f = f;
                best_t = t;
            }
            for k in 0..m {
                let (r, i2) = (ph_re[k], ph_im[k]);
                ph_re[k] = r * rot_re[k] - i2 * rot_im[k];
                ph_im[k] = r * rot_im[k] + i2 * rot_re[k];
            }
        }
        (best_t, best_f)
    }
}

/// f_{to←from}(t) = |⟨to| e^(−iHt) |from⟩| for one time point.
pub fn amplitude(eigs: &EigenSystem, from: usize, to: usize, t: f64) -> f64 {
    TransitionAmplitude::new(eigs, from, to).eval(t)
}

/// Input-averaged transfer fidelity F = 1/2 + f_r/3 + f_r²/6.
///
/// Monotone in f_r; F(0) = 1/2, F(1) = 1. Values outside [0, 1] by more
/// than 1e-9 are rejected; smaller excursions are clamped.
pub fn avg_fidelity(f_r: f64) -> Result<f64> {
    if !(-1e-9..=1.0 + 1e-9).contains(&f_r) {
        return Err(Error::AmplitudeDomain(f_r));
    }
    let f = f_r.clamp(0.0, 1.0);
    Ok(0.5 + f / 3.0 + f * f / 6.0)
}

/// Result of the maximum-fidelity search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FidelityResult {
    /// max_t F(t) over the window; in [1/2, 1].
    pub f_max: f64,
    /// argmax time, units of 1/J.
    pub t_star: f64,
    /// Window end T = window_mult·τ (the search covers (0, T]).
    pub window_end: f64,
    /// Coarse-grid size used before refinement.
    pub grid_points: usize,
}

/// Search max F(t) over (0, window_mult·τ]: a uniform coarse grid followed
/// by golden-section refinement around the best grid point down to a time
/// resolution of 1e-6·τ. Refinement never loses to the grid: if the local
/// envelope is not unimodal the coarse maximum is kept.
pub fn find_f_max(
    full_eigs: &EigenSystem,
    spec: &ChainSpec,
    window_mult: f64,
    coarse_per_tau: usize,
) -> Result<FidelityResult> {
    if full_eigs.dim() != spec.n + 2 {
        return Err(Error::InvalidInput(format!(
            "expected the full (N+2)-site decomposition (N = {}), got dimension {}",
            spec.n,
            full_eigs.dim()
        )));
    }
    if window_mult.is_nan() || window_mult <= 0.0 || coarse_per_tau == 0 {
        return Err(Error::InvalidInput(
            "window_mult must be > 0 and coarse_per_tau >= 1".into(),
        ));
    }
    let tau = spec.tau()?; // rejects g_s·g_r = 0

    let amp = TransitionAmplitude::sender_to_receiver(full_eigs, spec);
    let window_end = window_mult * tau;
    let grid_points = ((window_mult * coarse_per_tau as f64).round() as usize).max(1);
    let dt = window_end / grid_points as f64;

    let (coarse_t, coarse_f) = amp.scan_max(dt, dt, grid_points);

    // local refinement, clipped to the window
    let lo = (coarse_t - dt).max(dt * 1e-3);
    let hi = (coarse_t + dt).min(window_end);
    let (refined_t, refined_f) = golden_max(|t| amp.eval(t), lo, hi, 1e-6 * tau);

    let (t_star, f_r) = if refined_f >= coarse_f {
        (refined_t, refined_f)
    } else {
        (coarse_t, amp.eval(coarse_t))
    };

    Ok(FidelityResult {
        f_max: avg_fidelity(f_r)?,
        t_star,
        window_end,
        grid_points,
    })
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid))
}

/// Occupation probabilities of sender, receiver, and channel along a
/// uniform time grid, starting from |s⟩.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyTrace {
    pub times: Vec<f64>,
    pub p_s: Vec<f64>,
    pub p_r: Vec<f64>,
    pub p_ch: Vec<f64>,
}

impl OccupancyTrace {
    /// CSV export: `t,p_s,p_r,p_ch`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,p_s,p_r,p_ch")?;
        for i in 0..self.times.len() {
            writeln!(
                w,
                "{},{},{},{}",
                self.times[i], self.p_s[i], self.p_r[i], self.p_ch[i]
            )?;
        }
        Ok(())
    }
}

/// Evolve |s⟩ and record f_s², f_r², and Σ_n f_n² on `samples` uniformly
/// spaced times over [0, t_end].
pub fn occupancy_trace(
    full_eigs: &EigenSystem,
    spec: &ChainSpec,
    t_end: f64,
    samples: usize,
) -> Result<OccupancyTrace> {
    if full_eigs.dim() != spec.n + 2 {
        return Err(Error::InvalidInput(
            "occupancy trace needs the full (N+2)-site decomposition".into(),
        ));
    }
    if t_end.is_nan() || t_end <= 0.0 || samples < 2 {
        return Err(Error::InvalidInput(
            "need t_end > 0 and at least 2 samples".into(),
        ));
    }

    let m = full_eigs.dim();
    let sender = spec.sender_index();
    let receiver = spec.receiver_index();
    let weights: Vec<f64> = full_eigs.vectors.iter().map(|v| v[sender]).collect();

    let mut trace = OccupancyTrace {
        times: Vec::with_capacity(samples),
        p_s: Vec::with_capacity(samples),
        p_r: Vec::with_capacity(samples),
        p_ch: Vec::with_capacity(samples),
    };
    let mut c_re = vec![0.0; m];
    let mut c_im = vec![0.0; m];
    for i in 0..samples {
        let t = t_end * i as f64 / (samples - 1) as f64;
        c_re.iter_mut().for_each(|x| *x = 0.0);
        c_im.iter_mut().for_each(|x| *x = 0.0);
        for (k, v) in full_eigs.vectors.iter().enumerate() {
            let (s, c) = (full_eigs.energies[k] * t).sin_cos();
            let (w_re, w_im) = (weights[k] * c, -weights[k] * s);
            for i2 in 0..m {
                c_re[i2] += w_re * v[i2];
                c_im[i2] += w_im * v[i2];
            }
        }
        let prob = |i2: usize| c_re[i2] * c_re[i2] + c_im[i2] * c_im[i2];
        let p_ch: f64 = (1..=spec.n).map(prob).sum();
        trace.times.push(t);
        trace.p_s.push(prob(sender));
        trace.p_r.push(prob(receiver));
        trace.p_ch.push(p_ch);
    }
    Ok(trace)
}

/// Fidelity-trace export: `t,F` over [0, t_end] on a uniform grid.
pub fn write_fidelity_trace_csv<W: Write>(
    full_eigs: &EigenSystem,
    spec: &ChainSpec,
    t_end: f64,
    samples: usize,
    mut w: W,
) -> Result<()> {
    if t_end.is_nan() || t_end <= 0.0 || samples < 2 {
        return Err(Error::InvalidInput(
            "need t_end > 0 and at least 2 samples".into(),
        ));
    }
    let amp = TransitionAmplitude::sender_to_receiver(full_eigs, spec);
    writeln!(w, "t,F")?;
    for i in 0..samples {
        let t = t_end * i as f64 / (samples - 1) as f64;
        writeln!(w, "{},{}", t, avg_fidelity(amp.eval(t))?)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::{self, DisorderParams};
    use crate::hamiltonian::{build_full, ChainSpec, TriMatrix};
    use crate::spectral::eigendecompose;
    use proptest::prelude::*;

    fn disordered_full(n: usize, alpha: f64, seed: u64, g: f64) -> (ChainSpec, EigenSystem) {
        let seq = disorder::generate(&DisorderParams::new(n, alpha, seed).unwrap()).unwrap();
        let spec = ChainSpec::symmetric(n, 1.0, g, 0.0, seq).unwrap();
        let eigs = eigendecompose(&build_full(&spec).unwrap()).unwrap();
        (spec, eigs)
    }

    #[test]
    fn identity_evolution_at_t_zero() {
        let (spec, eigs) = disordered_full(20, 2.0, 3, 0.01);
        assert!((amplitude(&eigs, 0, 0, 0.0) - 1.0).abs() <= 1e-12);
        assert!(amplitude(&eigs, 0, spec.receiver_index(), 0.0).abs() <= 1e-12);
    }

    #[test]
    fn two_site_rabi_closed_form() {
        let g = 0.37;
        let m = TriMatrix::new(vec![0.0, 0.0], vec![-g]).unwrap();
        let eigs = eigendecompose(&m).unwrap();
        for t in [0.0, 0.3, 1.7, 4.0, 11.3] {
            let f = amplitude(&eigs, 0, 1, t);
            assert!((f - (g * t).sin().abs()).abs() <= 1e-12, "t = {t}");
        }
    }

    #[test]
    fn unitarity_on_disordered_instance() {
        let (spec, eigs) = disordered_full(50, 1.5, 8, 0.01);
        for t in [0.17, 23.0, 417.0] {
            let total: f64 = (0..spec.n + 2)
                .map(|i| amplitude(&eigs, 0, i, t).powi(2))
                .sum();
            assert!((total - 1.0).abs() <= 1e-10, "t = {t}: {total}");
        }
    }

    #[test]
    fn time_reversal_symmetry() {
        let (spec, eigs) = disordered_full(30, 2.0, 4, 0.005);
        let r = spec.receiver_index();
        for t in [1.0, 100.0, 5000.0] {
            let fwd = amplitude(&eigs, 0, r, t);
            let bwd = amplitude(&eigs, r, 0, t);
            assert!((fwd - bwd).abs() <= 1e-12);
        }
    }

    #[test]
    fn avg_fidelity_values() {
        assert!((avg_fidelity(1.0).unwrap() - 1.0).abs() <= 1e-15);
        assert!((avg_fidelity(0.0).unwrap() - 0.5).abs() <= 1e-15);
        assert!((avg_fidelity(0.5).unwrap() - 17.0 / 24.0).abs() <= 1e-15);
        assert!((avg_fidelity(1.0 + 5e-10).unwrap() - 1.0).abs() <= 1e-15);
        assert!(matches!(
            avg_fidelity(1.1),
            Err(Error::AmplitudeDomain(_))
        ));
    }

    #[test]
    fn scan_matches_exact_eval() {
        let (spec, eigs) = disordered_full(24, 2.0, 12, 0.05);
        let amp = TransitionAmplitude::new(&eigs, 0, spec.receiver_index());
        let dt = 0.731;
        let n = 10_000;
        let (best_t, best_f) = amp.scan_max(dt, dt, n);
        let mut expect_f = f64::NEG_INFINITY;
        let mut expect_t = dt;
        for i in 0..n {
            let t = dt + i as f64 * dt;
            let f = amp.eval(t);
            if f > expect_f {
                expect_f = f;
                expect_t = t;
            }
        }
        assert!((best_f - expect_f).abs() <= 1e-9, "{best_f} vs {expect_f}");
        assert!((best_t - expect_t).abs() <= 1e-9 * expect_t.max(1.0));
    }

    #[test]
    fn noiseless_transfer_is_nearly_perfect() {
        let g = 0.001;
        let spec = ChainSpec::symmetric(
            50,
            1.0,
            g,
            0.0,
            crate::disorder::DisorderSequence::zeros(50),
        )
        .unwrap();
        let eigs = eigendecompose(&build_full(&spec).unwrap()).unwrap();
        let res = find_f_max(&eigs, &spec, DEFAULT_WINDOW_MULT, DEFAULT_COARSE_PER_TAU).unwrap();
        assert!(res.f_max >= 0.99, "F_max = {}", res.f_max);

        // t_star sits within 5% of an odd multiple of τ
        let tau = spec.tau().unwrap();
        let ratio = res.t_star / tau;
        let nearest_odd = 2.0 * ((ratio - 1.0) / 2.0).round() + 1.0;
        assert!(
            (ratio - nearest_odd).abs() <= 0.05 * nearest_odd.abs().max(1.0),
            "t_star/τ = {ratio}"
        );

        // re-evaluation reproduces the reported maximum
        let amp = TransitionAmplitude::new(&eigs, 0, spec.receiver_index());
        let again = avg_fidelity(amp.eval(res.t_star)).unwrap();
        assert!((again - res.f_max).abs() <= 1e-12);
    }

    #[test]
    fn decoupled_sender_gives_half_fidelity() {
        // g_s = 0 ⇒ f_r ≡ 0 ⇒ F = 1/2 at every t (τ itself is undefined)
        let seq = crate::disorder::DisorderSequence::zeros(10);
        let spec = ChainSpec::new(10, 1.0, 0.0, 0.01, 0.0, 0.0, seq).unwrap();
        let eigs = eigendecompose(&build_full(&spec).unwrap()).unwrap();
        assert!(matches!(
            find_f_max(&eigs, &spec, 20.0, 100),
            Err(Error::InvalidInput(_))
        ));
        for t in [0.5, 10.0, 300.0] {
            let f = amplitude(&eigs, 0, spec.receiver_index(), t);
            assert!(f.abs() <= 1e-12);
            assert!((avg_fidelity(f).unwrap() - 0.5).abs() <= 1e-12);
        }
    }

    #[test]
    fn occupancy_trace_basics() {
        let (spec, eigs) = disordered_full(16, 3.0, 21, 0.02);
        let trace = occupancy_trace(&eigs, &spec, 500.0, 200).unwrap();
        assert_eq!(trace.times.len(), 200);
        assert!((trace.p_s[0] - 1.0).abs() <= 1e-12);
        assert!(trace.p_r[0].abs() <= 1e-12);
        assert!(trace.p_ch[0].abs() <= 1e-12);
        for i in 0..trace.times.len() {
            let total = trace.p_s[i] + trace.p_r[i] + trace.p_ch[i];
            assert!((total - 1.0).abs() <= 1e-10, "i = {i}: {total}");
        }
    }

    #[test]
    fn trace_csv_header() {
        let (spec, eigs) = disordered_full(8, 0.0, 2, 0.05);
        let trace = occupancy_trace(&eigs, &spec, 10.0, 5).unwrap();
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,p_s,p_r,p_ch\n"));
        assert_eq!(text.lines().count(), 6);

        let mut buf = Vec::new();
        write_fidelity_trace_csv(&eigs, &spec, 10.0, 5, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,F\n"));
        assert_eq!(text.lines().count(), 6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn fidelity_monotone_in_amplitude(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(avg_fidelity(lo).unwrap() <= avg_fidelity(hi).unwrap());
        }

        #[test]
        fn refinement_never_loses_to_grid(seed in 0u64..500) {
            let (spec, eigs) = disordered_full(12, 2.0, seed, 0.02);
            let amp = TransitionAmplitude::new(&eigs, 0, spec.receiver_index());
            let res = find_f_max(&eigs, &spec, 4.0, 200).unwrap();
            let grid_points = res.grid_points;
            let dt = res.window_end / grid_points as f64;
            let mut coarse_best = f64::NEG_INFINITY;
            for i in 1..=grid_points {
                coarse_best = coarse_best.max(amp.eval(i as f64 * dt));
            }
            prop_assert!(res.f_max >= avg_fidelity(coarse_best).unwrap() - 1e-12);
        }
    }
}
