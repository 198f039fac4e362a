//! Exact unitary propagation by Hermitian eigendecomposition, with a
//! layered fast path that evolves each witness configuration as an
//! independent 35-site block when all witnesses are blind.

use nalgebra::{DMatrix, DVector};

use crate::composite::TotalHamiltonian;
use crate::device::{DeviceGeometry, N_SITES};
use crate::error::{Error, Result};
use crate::C64;

/// Normalized amplitude vector over the composite basis at a given time
/// (time in physical units, hbar = gamma = 1).
#[derive(Debug, Clone)]
pub struct StateVector {
    pub amplitudes: DVector<C64>,
    pub time: f64,
    pub n_wit: usize,
}

impl StateVector {
    pub fn new(amplitudes: DVector<C64>, time: f64, n_wit: usize) -> Result<Self> {
        let expected = (1usize << n_wit) * N_SITES;
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: amplitudes.len(),
            });
        }
        let state = StateVector {
            amplitudes,
            time,
            n_wit,
        };
        let norm = state.norm();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "state norm {norm} deviates from 1 beyond 1e-9"
            )));
        }
        Ok(state)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

/// Gaussian wavepacket on the input lead (sites 1..=15), zero elsewhere.
///
/// Amplitudes exp(-(x_j - x0)^2 / (2 w^2)) * exp(i k x_j), normalized.
pub fn gaussian_packet(geom: &DeviceGeometry, x0: f64, w: f64, k: f64) -> Result<DVector<C64>> {
    if w <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "packet width must be positive, got {w}"
        )));
    }
    let mut amp = DVector::<C64>::zeros(N_SITES);
    for s in 0..15 {
        let (x, _) = geom.positions[s];
        let envelope = (-(x - x0).powi(2) / (2.0 * w * w)).exp();
        amp[s] = envelope * C64::new((k * x).cos(), (k * x).sin());
    }
    let norm = amp.norm();
    amp /= C64::new(norm, 0.0);
    Ok(amp)
}

/// Default packet parameters: x0 = 5a, w = 2a, k a = pi/2.
pub fn default_packet(geom: &DeviceGeometry) -> DVector<C64> {
    gaussian_packet(geom, 5.0, 2.0, std::f64::consts::FRAC_PI_2).expect("default packet")
}

/// Exact propagator from the eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: DMatrix<C64>,
}

impl SpectralPropagator {
    pub fn new(h: &DMatrix<C64>) -> Result<Self> {
        let herm = (h - h.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !herm.is_finite() || herm > 1e-9 {
            return Err(Error::Eigen(format!(
                "matrix is not Hermitian (max deviation {herm:e})"
            )));
        }
        let se = h.clone().symmetric_eigen();
        let prop = SpectralPropagator {
            eigenvalues: se.eigenvalues,
            eigenvectors: se.eigenvectors,
        };
        let rec = prop.reconstruction_error(h);
        if !rec.is_finite() || rec > 1e-10 * h.nrows() as f64 {
            return Err(Error::Eigen(format!(
                "eigendecomposition reconstruction error {rec:e}"
            )));
        }
        Ok(prop)
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// max |V Lambda V^H - H|, for validation.
    pub fn reconstruction_error(&self, h: &DMatrix<C64>) -> f64 {
        let lambda =
            DMatrix::from_diagonal(&self.eigenvalues.map(|x| C64::new(x, 0.0)));
        let rec = &self.eigenvectors * lambda * self.eigenvectors.adjoint();
        (rec - h).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Apply exp(-i H t) to a raw amplitude vector.
    pub fn apply(&self, amp: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
        if amp.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: amp.len(),
            });
        }
        let mut coeffs = self.eigenvectors.adjoint() * amp;
        for (c, &e) in coeffs.iter_mut().zip(self.eigenvalues.iter()) {
            let phase = -e * t;
            *c *= C64::new(phase.cos(), phase.sin());
        }
        Ok(&self.eigenvectors * coeffs)
    }
}

/// One spectral propagator per witness configuration; valid only when all
/// witnesses are blind.
#[derive(Debug, Clone)]
pub struct LayeredPropagator {
    pub blocks: Vec<SpectralPropagator>,
}

impl LayeredPropagator {
    pub fn new(h: &TotalHamiltonian) -> Result<Self> {
        if !h.is_block_diagonal() {
            return Err(Error::InvalidParameter(
                "layered propagator requires gamma_w = 0 for every witness".into(),
            ));
        }
        let blocks = (0..h.basis().n_configs())
            .map(|w| SpectralPropagator::new(&h.layer_block(w)))
            .collect::<Result<Vec<_>>>()?;
        Ok(LayeredPropagator { blocks })
    }

    pub fn dim(&self) -> usize {
        self.blocks.len() * N_SITES
    }

    pub fn apply(&self, amp: &DVector<C64>, t: f64) -> Result<DVector<C64>> {
        if amp.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: amp.len(),
            });
        }
        let mut out = DVector::<C64>::zeros(amp.len());
        for (w, block) in self.blocks.iter().enumerate() {
            let seg = amp.rows(w * N_SITES, N_SITES).clone_owned();
            let evolved = block.apply(&seg, t)?;
            out.rows_mut(w * N_SITES, N_SITES).copy_from(&evolved);
        }
        Ok(out)
    }
}

/// Either exact realization of exp(-i H t).
#[derive(Debug, Clone)]
pub enum Propagator {
    Dense(SpectralPropagator),
    Layered(LayeredPropagator),
}

impl Propagator {
    /// Dense propagator over the assembled composite matrix.
    pub fn dense(h: &TotalHamiltonian) -> Result<Self> {
        Ok(Propagator::Dense(SpectralPropagator::new(&h.dense_matrix())?))
    }

    /// Layered propagator over the per-configuration blocks.
    pub fn layered(h: &TotalHamiltonian) -> Result<Self> {
        Ok(Propagator::Layered(LayeredPropagator::new(h)?))
    }

    /// Layered when the structure allows it and the system is large enough
    /// for the block path to pay off, dense otherwise.
    pub fn auto(h: &TotalHamiltonian) -> Result<Self> {
        if h.is_block_diagonal() && h.witnesses.len() >= 5 {
            Self::layered(h)
        } else {
            Self::dense(h)
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Propagator::Dense(p) => p.dim(),
            Propagator::Layered(p) => p.dim(),
        }
    }

    pub fn path_name(&self) -> &'static str {
        match self {
            Propagator::Dense(_) => "dense",
            Propagator::Layered(_) => "layered",
        }
    }

    /// Evolve a state forward by duration `t` (exact for any t, positive
    /// or negative).
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        let amp = match self {
            Propagator::Dense(p) => p.apply(&psi.amplitudes, t)?,
            Propagator::Layered(p) => p.apply(&psi.amplitudes, t)?,
        };
        Ok(StateVector {
            amplitudes: amp,
            time: psi.time + t,
            n_wit: psi.n_wit,
        })
    }
}

/// Oracle: max component-wise deviation between full dense evolution and
/// layered evolution over the given times. Requires gamma_w = 0.
pub fn layered_evolve_equivalence_check(
    h: &TotalHamiltonian,
    psi0: &StateVector,
    times: &[f64],
) -> Result<f64> {
    if !h.is_block_diagonal() {
        return Err(Error::InvalidParameter(
            "equivalence check requires gamma_w = 0 for every witness".into(),
        ));
    }
    let dense = Propagator::dense(h)?;
    let layered = Propagator::layered(h)?;
    let mut max_dev = 0.0f64;
    for &t in times {
        let a = dense.evolve(psi0, t)?;
        let b = layered.evolve(psi0, t)?;
        let dev = (a.amplitudes - b.amplitudes)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        max_dev = max_dev.max(dev);
    }
    Ok(max_dev)
}
