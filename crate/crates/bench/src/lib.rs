//! Shared fixtures for the benchmark targets.

use spinchannel::disorder::{self, DisorderParams};
use spinchannel::hamiltonian::ChainSpec;

/// A disordered chain at the standard operating point: J = 1, symmetric
/// outer couplings, band-center terminals.
pub fn standard_spec(n: usize, alpha: f64, seed: u64, g: f64) -> ChainSpec {
    let params = DisorderParams::new(n, alpha, seed).expect("valid params");
    let seq = disorder::generate(&params).expect("generation succeeds");
    ChainSpec::symmetric(n, 1.0, g, 0.0, seq).expect("valid spec")
}
