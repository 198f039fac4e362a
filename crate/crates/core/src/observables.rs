//! Measured quantities: site probabilities, output probability,
//! normalized interference pattern, visibility, witness Bloch vectors,
//! coherence angles and von Neumann entropies.

use nalgebra::DMatrix;

use crate::composite::{CompositeBasis, WitnessSpec};
use crate::device::{N_SITES, OUTPUT_SITE};
use crate::error::{Error, Result};
use crate::evolve::StateVector;
use crate::C64;

/// Marginal probability of finding the particle on each device site.
#[derive(Debug, Clone)]
pub struct SiteProbabilityField {
    pub p: Vec<f64>,
    pub time: f64,
}

/// Coherence (Bloch) vector of one witness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn length(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Per-witness coherence data plus the device entropy.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub bloch: Vec<BlochVector>,
    /// Coherence angle theta_m = atan2(lambda_y, lambda_x), in (-pi, pi].
    pub theta: Vec<f64>,
    /// Witness von Neumann entropy in bits.
    pub entropy: Vec<f64>,
    /// Device von Neumann entropy in bits.
    pub device_entropy: f64,
}

/// Binary entropy in bits, with 0 log 0 := 0.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// p_j = sum over witness configurations of |psi(w, j)|^2.
pub fn site_probabilities(psi: &StateVector) -> SiteProbabilityField {
    let basis = CompositeBasis::new(psi.n_wit);
    let mut p = vec![0.0; N_SITES];
    for w in 0..basis.n_configs() {
        for s in 0..N_SITES {
            p[s] += psi.amplitudes[basis.index(w, s)].norm_sqr();
        }
    }
    SiteProbabilityField { p, time: psi.time }
}

/// Marginal probability at the output site j_out = 27.
pub fn p_out(psi_at_tf: &StateVector) -> f64 {
    site_probabilities(psi_at_tf).p[OUTPUT_SITE.offset()]
}

/// Normalize a flux sweep: dP = (P - P_mid) / P_mid with
/// P_mid = (P_max + P_min) / 2 from the sampled extrema.
pub fn normalized_output(sweep: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if sweep.is_empty() {
        return Err(Error::InvalidParameter("empty flux sweep".into()));
    }
    let p_max = sweep.iter().map(|&(_, p)| p).fold(f64::MIN, f64::max);
    let p_min = sweep.iter().map(|&(_, p)| p).fold(f64::MAX, f64::min);
    let p_mid = 0.5 * (p_max + p_min);
    if p_mid <= 0.0 {
        return Err(Error::InvalidParameter(
            "degenerate flux sweep: P_max = P_min = 0".into(),
        ));
    }
    Ok(sweep
        .iter()
        .map(|&(f, p)| (f, (p - p_mid) / p_mid))
        .collect())
}

/// Interference visibility (P_max - P_min) / (P_max + P_min).
///
/// Requires at least 101 samples spanning at least one flux period.
pub fn visibility(sweep: &[(f64, f64)]) -> Result<f64> {
    if sweep.len() < 101 {
        return Err(Error::InvalidParameter(format!(
            "visibility needs >= 101 sweep samples, got {}",
            sweep.len()
        )));
    }
    let f_min = sweep.iter().map(|&(f, _)| f).fold(f64::MAX, f64::min);
    let f_max = sweep.iter().map(|&(f, _)| f).fold(f64::MIN, f64::max);
    if f_max - f_min < 1.0 - 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "visibility sweep must cover one full flux period, got span {}",
            f_max - f_min
        )));
    }
    let p_max = sweep.iter().map(|&(_, p)| p).fold(f64::MIN, f64::max);
    let p_min = sweep.iter().map(|&(_, p)| p).fold(f64::MAX, f64::min);
    if p_max + p_min <= 0.0 {
        return Err(Error::InvalidParameter(
            "degenerate flux sweep: P_max = P_min = 0".into(),
        ));
    }
    Ok((p_max - p_min) / (p_max + p_min))
}

/// Reduced 2x2 density matrix of witness m (zero-based), as
/// (rho_aa, rho_ab, rho_bb); rho_ba is the conjugate of rho_ab.
fn witness_reduced(psi: &StateVector, m: usize) -> (f64, C64, f64) {
    let basis = CompositeBasis::new(psi.n_wit);
    let mask = 1usize << m;
    let mut rho_aa = 0.0;
    let mut rho_bb = 0.0;
    let mut rho_ab = C64::new(0.0, 0.0);
    for w in 0..basis.n_configs() {
        if w & mask != 0 {
            continue; // visit each (alpha, beta) pair once via the alpha side
        }
        let wb = w | mask;
        for s in 0..N_SITES {
            let a = psi.amplitudes[basis.index(w, s)];
            let b = psi.amplitudes[basis.index(wb, s)];
            rho_aa += a.norm_sqr();
            rho_bb += b.norm_sqr();
            rho_ab += a * b.conj();
        }
    }
    (rho_aa, rho_ab, rho_bb)
}

/// Bloch vector of witness m from its reduced density matrix.
pub fn witness_bloch(psi: &StateVector, m: usize) -> Result<BlochVector> {
    if m >= psi.n_wit {
        return Err(Error::InvalidParameter(format!(
            "witness index {m} out of range for {} witnesses",
            psi.n_wit
        )));
    }
    let (rho_aa, rho_ab, rho_bb) = witness_reduced(psi, m);
    Ok(BlochVector {
        x: 2.0 * rho_ab.re,
        y: -2.0 * rho_ab.im,
        z: rho_aa - rho_bb,
    })
}

/// Device reduced density matrix rho(j, j') = sum_w psi(w, j) psi*(w, j').
pub fn device_reduced_density(psi: &StateVector) -> DMatrix<C64> {
    let basis = CompositeBasis::new(psi.n_wit);
    let mut rho = DMatrix::<C64>::zeros(N_SITES, N_SITES);
    for w in 0..basis.n_configs() {
        let seg = psi.amplitudes.rows(basis.index(w, 0), N_SITES);
        for j in 0..N_SITES {
            for jp in 0..N_SITES {
                rho[(j, jp)] += seg[j] * seg[jp].conj();
            }
        }
    }
    rho
}

/// von Neumann entropy in bits of a Hermitian density matrix.
pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> f64 {
    let eigs = rho.clone().symmetric_eigen().eigenvalues;
    eigs.iter()
        .filter(|&&p| p > 1e-15)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Full coherence report: Bloch vector, angle and entropy per witness,
/// plus the device entropy.
pub fn witness_report(psi: &StateVector, witnesses: &[WitnessSpec]) -> Result<WitnessReport> {
    if witnesses.len() != psi.n_wit {
        return Err(Error::DimensionMismatch {
            expected: psi.n_wit,
            got: witnesses.len(),
        });
    }
    let mut bloch = Vec::with_capacity(psi.n_wit);
    let mut theta = Vec::with_capacity(psi.n_wit);
    let mut entropy = Vec::with_capacity(psi.n_wit);
    for m in 0..psi.n_wit {
        let b = witness_bloch(psi, m)?;
        theta.push(b.y.atan2(b.x));
        // eigenvalues of rho = (1 + lambda . sigma) / 2 are (1 +- |lambda|) / 2
        let p = 0.5 * (1.0 + b.length().min(1.0));
        entropy.push(binary_entropy(p));
        bloch.push(b);
    }
    let device_entropy = von_neumann_entropy(&device_reduced_density(psi));
    Ok(WitnessReport {
        bloch,
        theta,
        entropy,
        device_entropy,
    })
}

/// Marginal occupancies (p_alpha, p_beta) of witness m.
pub fn witness_site_occupancy(psi: &StateVector, m: usize) -> Result<(f64, f64)> {
    if psi.n_wit == 0 {
        return Err(Error::InvalidParameter(
            "witness occupancy is undefined without witnesses".into(),
        ));
    }
    if m >= psi.n_wit {
        return Err(Error::InvalidParameter(format!(
            "witness index {m} out of range for {} witnesses",
            psi.n_wit
        )));
    }
    let (rho_aa, _, rho_bb) = witness_reduced(psi, m);
    Ok((rho_aa, rho_bb))
}
