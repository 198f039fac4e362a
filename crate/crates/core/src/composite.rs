//! Witnesses, the tensor-product basis, and assembly of the total
//! Hamiltonian for device plus witnesses.
//!
//! Basis convention: global index g = w * 35 + (j - 1), where j is the
//! device site and w encodes the witness occupations, bit (m - 1) of w
//! being 0 for |alpha_m> and 1 for |beta_m>.

use nalgebra::{DMatrix, DVector};

use crate::device::{BranchLabel, DeviceHamiltonian, N_SITES};
use crate::error::{Error, Result};
use crate::evolve::StateVector;
use crate::C64;

/// One two-state witness attached to a branch site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessSpec {
    /// Branch alias label of the device site this witness couples to.
    pub position: BranchLabel,
    /// Internal tunneling energy; 0 for a blind witness.
    pub gamma_w: f64,
    /// Coulomb coupling to the partner device site.
    pub e_int: f64,
}

impl WitnessSpec {
    pub fn blind(position: BranchLabel, e_int: f64) -> Self {
        WitnessSpec {
            position,
            gamma_w: 0.0,
            e_int,
        }
    }
}

/// The symmetric branch layouts used for 0, 2, 4, 6 and 8 witnesses.
pub fn standard_witness_layout(n_wit: usize) -> Result<Vec<BranchLabel>> {
    let positions: &[u8] = match n_wit {
        0 => &[],
        2 => &[3],
        4 => &[1, 5],
        6 => &[1, 3, 5],
        8 => &[1, 2, 4, 5],
        _ => {
            return Err(Error::InvalidParameter(format!(
                "no standard layout for {n_wit} witnesses; layout requires explicit positions"
            )))
        }
    };
    let mut out = Vec::with_capacity(n_wit);
    for &k in positions {
        out.push(BranchLabel::top(k)?);
        out.push(BranchLabel::bottom(k)?);
    }
    Ok(out)
}

/// Index arithmetic for the composite basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompositeBasis {
    pub n_wit: usize,
}

impl CompositeBasis {
    pub fn new(n_wit: usize) -> Self {
        CompositeBasis { n_wit }
    }

    /// Number of witness configurations, 2^n_wit.
    pub fn n_configs(self) -> usize {
        1usize << self.n_wit
    }

    /// Total Hilbert-space dimension.
    pub fn dim(self) -> usize {
        self.n_configs() * N_SITES
    }

    /// Global index of (configuration w, device offset s).
    pub fn index(self, w: usize, site_offset: usize) -> usize {
        w * N_SITES + site_offset
    }

    /// True if witness m (zero-based) occupies |alpha> in configuration w.
    pub fn is_alpha(self, w: usize, m: usize) -> bool {
        w & (1 << m) == 0
    }
}

/// Total Hamiltonian of device plus witnesses, kept in component form so
/// both the dense matrix and the per-configuration blocks can be realized.
#[derive(Debug, Clone)]
pub struct TotalHamiltonian {
    pub device: DeviceHamiltonian,
    pub witnesses: Vec<WitnessSpec>,
}

impl TotalHamiltonian {
    pub fn basis(&self) -> CompositeBasis {
        CompositeBasis::new(self.witnesses.len())
    }

    /// True when every witness is blind (gamma_w = 0), i.e. the matrix is
    /// block-diagonal over witness configurations.
    pub fn is_block_diagonal(&self) -> bool {
        self.witnesses.iter().all(|wit| wit.gamma_w == 0.0)
    }

    /// The 35 x 35 block for witness configuration `w`: the device
    /// Hamiltonian plus E_int on the partner site of every witness whose
    /// alpha dot is occupied in `w`.
    pub fn layer_block(&self, w: usize) -> DMatrix<C64> {
        let basis = self.basis();
        let mut block = self.device.matrix.clone();
        for (m, wit) in self.witnesses.iter().enumerate() {
            if basis.is_alpha(w, m) {
                let s = wit.position.device_site().offset();
                block[(s, s)] += C64::new(wit.e_int, 0.0);
            }
        }
        block
    }

    /// Assemble the full dense matrix over the composite basis.
    pub fn dense_matrix(&self) -> DMatrix<C64> {
        let basis = self.basis();
        let dim = basis.dim();
        let mut h = DMatrix::<C64>::zeros(dim, dim);
        for w in 0..basis.n_configs() {
            let block = self.layer_block(w);
            let g0 = basis.index(w, 0);
            h.view_mut((g0, g0), (N_SITES, N_SITES)).copy_from(&block);
        }
        // witness tunneling flips one occupation bit, identity on the device
        for (m, wit) in self.witnesses.iter().enumerate() {
            if wit.gamma_w == 0.0 {
                continue;
            }
            let t = C64::new(-wit.gamma_w, 0.0);
            for w in 0..basis.n_configs() {
                let w2 = w ^ (1 << m);
                if w2 < w {
                    continue;
                }
                for s in 0..N_SITES {
                    h[(basis.index(w, s), basis.index(w2, s))] = t;
                    h[(basis.index(w2, s), basis.index(w, s))] = t;
                }
            }
        }
        h
    }
}

/// Build the total Hamiltonian from a device Hamiltonian and a witness list.
pub fn build_total_hamiltonian(
    device: DeviceHamiltonian,
    witnesses: Vec<WitnessSpec>,
) -> Result<TotalHamiltonian> {
    for (i, a) in witnesses.iter().enumerate() {
        for b in &witnesses[i + 1..] {
            if a.position == b.position {
                return Err(Error::InvalidParameter(format!(
                    "duplicate witness position {}",
                    a.position
                )));
            }
        }
    }
    Ok(TotalHamiltonian { device, witnesses })
}

/// Tensor the device packet with the witness states
/// (|alpha> + e^{i theta_m} |beta>) / sqrt(2); theta_m = 0 by default.
pub fn initial_composite_state(
    packet: &DVector<C64>,
    witnesses: &[WitnessSpec],
    witness_phases: Option<&[f64]>,
) -> Result<StateVector> {
    if packet.len() != N_SITES {
        return Err(Error::DimensionMismatch {
            expected: N_SITES,
            got: packet.len(),
        });
    }
    let norm = packet.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "device packet norm {norm} deviates from 1 beyond 1e-9"
        )));
    }
    if let Some(phases) = witness_phases {
        if phases.len() != witnesses.len() {
            return Err(Error::DimensionMismatch {
                expected: witnesses.len(),
                got: phases.len(),
            });
        }
    }

    let basis = CompositeBasis::new(witnesses.len());
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut amp = DVector::<C64>::zeros(basis.dim());
    for w in 0..basis.n_configs() {
        let mut coeff = C64::new(1.0, 0.0);
        for m in 0..witnesses.len() {
            if basis.is_alpha(w, m) {
                coeff *= inv_sqrt2;
            } else {
                let theta = witness_phases.map_or(0.0, |p| p[m]);
                coeff *= inv_sqrt2 * C64::new(theta.cos(), theta.sin());
            }
        }
        for s in 0..N_SITES {
            amp[basis.index(w, s)] = coeff * packet[s];
        }
    }
    StateVector::new(amp, 0.0, witnesses.len())
}
