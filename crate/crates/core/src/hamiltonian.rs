//! Single-excitation Hamiltonians for the disordered channel and for the
//! full chain with weakly coupled sender/receiver spins.
//!
//! In the one-excitation sector the XX chain reduces to a real symmetric
//! tridiagonal hopping matrix: ⟨i|H|i⟩ = ω_i and ⟨i|H|i±1⟩ = −J. The full
//! system uses the basis order (s, 1, …, N, r); every downstream module
//! relies on that ordering. The uniform identity shift in the spin
//! Hamiltonian is dropped — it only contributes a global phase.

use std::io::Write;

use crate::disorder::DisorderSequence;
use crate::error::{Error, Result};

/// Full system description. Couplings and fields are in units of J; J itself
/// defaults to 1 and only sets the energy scale.
#[derive(Clone, Debug)]
pub struct ChainSpec {
    pub n: usize,
    pub j: f64,
    pub g_s: f64,
    pub g_r: f64,
    pub omega_s: f64,
    pub omega_r: f64,
    pub disorder: DisorderSequence,
}

impl ChainSpec {
    pub fn new(
        n: usize,
        j: f64,
        g_s: f64,
        g_r: f64,
        omega_s: f64,
        omega_r: f64,
        disorder: DisorderSequence,
    ) -> Result<Self> {
        let spec = ChainSpec { n, j, g_s, g_r, omega_s, omega_r, disorder };
        spec.validate()?;
        Ok(spec)
    }

    /// Symmetric outer couplings g_s = g_r = g and ω_s = ω_r = ω.
    pub fn symmetric(n: usize, j: f64, g: f64, omega: f64, disorder: DisorderSequence) -> Result<Self> {
        ChainSpec::new(n, j, g, g, omega, omega, disorder)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("channel length N must be positive".into()));
        }
        if self.j.is_nan() || self.j <= 0.0 {
            return Err(Error::InvalidInput(format!("hopping J = {} must be > 0", self.j)));
        }
        if self.g_s.is_nan() || self.g_s < 0.0 || self.g_r.is_nan() || self.g_r < 0.0 {
            return Err(Error::InvalidInput(format!(
                "outer couplings must be >= 0 (got g_s = {}, g_r = {})",
                self.g_s, self.g_r
            )));
        }
        if self.disorder.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "disorder sequence has {} entries for a channel of length {}",
                self.disorder.len(),
                self.n
            )));
        }
        if !self.omega_s.is_finite() || !self.omega_r.is_finite() {
            return Err(Error::InvalidInput("terminal fields must be finite".into()));
        }
        Ok(())
    }

    /// Basis index of the sender in the full matrix.
    pub fn sender_index(&self) -> usize {
        0
    }

    /// Basis index of the receiver in the full matrix.
    pub fn receiver_index(&self) -> usize {
        self.n + 1
    }

    /// Geometric-mean outer coupling √(g_s g_r).
    pub fn coupling_scale(&self) -> f64 {
        (self.g_s * self.g_r).sqrt()
    }

    /// Noiseless transfer time τ = π/(2g²) in units of 1/J (g = √(g_s g_r)).
    pub fn tau(&self) -> Result<f64> {
        let g2 = self.g_s * self.g_r;
        if g2 <= 0.0 {
            return Err(Error::InvalidInput(
                "transfer time is undefined when g_s * g_r = 0".into(),
            ));
        }
        Ok(std::f64::consts::PI * self.j / (2.0 * g2))
    }
}

/// Real symmetric tridiagonal matrix, stored as one diagonal and one
/// off-diagonal (sub- equals super-diagonal by symmetry).
#[derive(Clone, Debug, PartialEq)]
pub struct TriMatrix {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl TriMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidInput("matrix dimension must be >= 1".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::InvalidInput(format!(
                "off-diagonal length {} does not match dimension {}",
                offdiag.len(),
                diag.len()
            )));
        }
        Ok(TriMatrix { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Matrix 1-norm (max absolute column sum), used to scale residual bounds.
    pub fn one_norm(&self) -> f64 {
        let m = self.dim();
        (0..m)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.offdiag[i - 1].abs();
                }
                if i + 1 < m {
                    s += self.offdiag[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }

    /// y = H x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let m = self.dim();
        assert_eq!(x.len(), m, "vector length must match matrix dimension");
        (0..m)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.offdiag[i - 1] * x[i - 1];
                }
                if i + 1 < m {
                    y += self.offdiag[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Debug dump of nonzero entries as `row,col,value` CSV.
    pub fn write_nonzero_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row,col,value")?;
        let m = self.dim();
        for i in 0..m {
            if i > 0 && self.offdiag[i - 1] != 0.0 {
                writeln!(w, "{},{},{}", i, i - 1, self.offdiag[i - 1])?;
            }
            if self.diag[i] != 0.0 {
                writeln!(w, "{},{},{}", i, i, self.diag[i])?;
            }
            if i + 1 < m && self.offdiag[i] != 0.0 {
                writeln!(w, "{},{},{}", i, i + 1, self.offdiag[i])?;
            }
        }
        Ok(())
    }
}

/// Channel-only matrix: N×N with diag ω_n and uniform hopping −J.
pub fn build_channel(spec: &ChainSpec) -> Result<TriMatrix> {
    spec.validate()?;
    TriMatrix::new(spec.disorder.values.clone(), vec![-spec.j; spec.n - 1])
}

/// Full matrix: (N+2)×(N+2) in basis order (s, 1, …, N, r).
///
/// Both outer hoppings enter with a negative sign; the relative sign is a
/// local gauge choice and leaves every |f_i(t)| unchanged.
pub fn build_full(spec: &ChainSpec) -> Result<TriMatrix> {
    spec.validate()?;
    let mut diag = Vec::with_capacity(spec.n + 2);
    diag.push(spec.omega_s);
    diag.extend_from_slice(&spec.disorder.values);
    diag.push(spec.omega_r);

    let mut offdiag = Vec::with_capacity(spec.n + 1);
    offdiag.push(-spec.g_s);
    offdiag.extend(std::iter::repeat_n(-spec.j, spec.n - 1));
    offdiag.push(-spec.g_r);

    TriMatrix::new(diag, offdiag)
}
