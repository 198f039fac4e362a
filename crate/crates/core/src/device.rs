//! The 35-site interference-device graph and its flux-dependent Hamiltonian.
//!
//! Site layout (lengths in units of the lattice spacing `a`):
//! sites 1..=15 form the input lead at y = 0, 16..=20 the top branch at
//! y = +1/2, 21..=25 the bottom branch at y = -1/2 and 26..=35 the output
//! lead at y = 0. Site 1 sits at the origin. Branch sites carry alias
//! labels 1..5 (top) and 1'..5' (bottom).

use nalgebra::DMatrix;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::C64;

/// Number of device sites.
pub const N_SITES: usize = 35;

/// Output site j_out: the second site of the output lead.
pub const OUTPUT_SITE: SiteIndex = SiteIndex(27);

/// One-based device site index in `1..=35`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SiteIndex(u32);

impl SiteIndex {
    pub fn new(value: u32) -> Result<Self> {
        if (1..=N_SITES as u32).contains(&value) {
            Ok(SiteIndex(value))
        } else {
            Err(Error::InvalidParameter(format!(
                "site index {value} out of range 1..=35"
            )))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Zero-based offset into matrices and amplitude vectors.
    pub fn offset(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for SiteIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Branch alias label: positions `1..5` on the top branch, `1'..5'` on the
/// bottom branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BranchLabel {
    position: u8,
    bottom: bool,
}

impl BranchLabel {
    pub fn new(position: u8, bottom: bool) -> Result<Self> {
        if (1..=5).contains(&position) {
            Ok(BranchLabel { position, bottom })
        } else {
            Err(Error::InvalidParameter(format!(
                "branch position {position} out of range 1..=5"
            )))
        }
    }

    pub fn top(position: u8) -> Result<Self> {
        Self::new(position, false)
    }

    pub fn bottom(position: u8) -> Result<Self> {
        Self::new(position, true)
    }

    pub fn is_bottom(self) -> bool {
        self.bottom
    }

    pub fn position(self) -> u8 {
        self.position
    }

    /// The device site this label aliases: top k -> 15 + k, bottom k' -> 20 + k.
    pub fn device_site(self) -> SiteIndex {
        let base = if self.bottom { 20 } else { 15 };
        SiteIndex(base + self.position as u32)
    }

    /// The mirror partner across the device axis (k <-> k').
    pub fn mirror(self) -> BranchLabel {
        BranchLabel {
            position: self.position,
            bottom: !self.bottom,
        }
    }
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.position, if self.bottom { "'" } else { "" })
    }
}

impl FromStr for BranchLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (digits, bottom) = match s.strip_suffix('\'') {
            Some(d) => (d, true),
            None => (s, false),
        };
        let position: u8 = digits.parse().map_err(|_| {
            Error::InvalidParameter(format!("bad branch label {s:?}; expected e.g. \"3\" or \"3'\""))
        })?;
        BranchLabel::new(position, bottom)
    }
}

/// Site positions and adjacency of the fixed 35-site device graph.
#[derive(Debug, Clone, Serialize)]
pub struct DeviceGeometry {
    /// (x, y) per site in units of a, indexed by site offset.
    pub positions: Vec<(f64, f64)>,
    /// Unordered site pairs as zero-based offsets.
    pub edges: Vec<(usize, usize)>,
    pub output_site: SiteIndex,
}

impl DeviceGeometry {
    pub fn degree(&self, site: SiteIndex) -> usize {
        let s = site.offset();
        self.edges
            .iter()
            .filter(|&&(a, b)| a == s || b == s)
            .count()
    }

    pub fn position(&self, site: SiteIndex) -> (f64, f64) {
        self.positions[site.offset()]
    }

    /// JSON dump of sites and edges (one-based indices) for plotting.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "sites": self.positions.iter().enumerate().map(|(i, &(x, y))| {
                serde_json::json!({ "index": i + 1, "x": x, "y": y })
            }).collect::<Vec<_>>(),
            "edges": self.edges.iter().map(|&(a, b)| [a + 1, b + 1]).collect::<Vec<_>>(),
            "output_site": self.output_site.get(),
        })
    }
}

/// Build the fixed device geometry. Deterministic.
pub fn build_geometry() -> DeviceGeometry {
    let mut positions = Vec::with_capacity(N_SITES);
    // input lead, sites 1..=15
    for j in 0..15 {
        positions.push((j as f64, 0.0));
    }
    // top branch, sites 16..=20
    for j in 0..5 {
        positions.push((15.0 + j as f64, 0.5));
    }
    // bottom branch, sites 21..=25
    for j in 0..5 {
        positions.push((15.0 + j as f64, -0.5));
    }
    // output lead, sites 26..=35
    for j in 0..10 {
        positions.push((20.0 + j as f64, 0.0));
    }

    let mut edges = Vec::with_capacity(N_SITES);
    for j in 0..14 {
        edges.push((j, j + 1)); // input lead
    }
    edges.push((14, 15)); // 15-16 left fork
    edges.push((14, 20)); // 15-21 left fork
    for j in 15..19 {
        edges.push((j, j + 1)); // top branch
    }
    for j in 20..24 {
        edges.push((j, j + 1)); // bottom branch
    }
    edges.push((19, 25)); // 20-26 right fork
    edges.push((24, 25)); // 25-26 right fork
    for j in 25..34 {
        edges.push((j, j + 1)); // output lead
    }

    DeviceGeometry {
        positions,
        edges,
        output_site: OUTPUT_SITE,
    }
}

/// Flux-dependent device Hamiltonian (35 x 35, Hermitian).
#[derive(Debug, Clone)]
pub struct DeviceHamiltonian {
    pub matrix: DMatrix<C64>,
    pub gamma: f64,
    pub flux_ratio: f64,
}

/// Peierls phase picked up hopping from site `from` to site `to`.
///
/// With A = -B y x_hat and B fixed so the loop (area 5 a^2) encloses
/// flux_ratio flux quanta, the straight-line integral for a hop is
/// -(2 pi flux_ratio / 5) * y_avg * dx; the directed phase sum around the
/// loop is then -2 pi flux_ratio.
fn hop_phase(geom: &DeviceGeometry, from: usize, to: usize, flux_ratio: f64) -> f64 {
    let (xf, yf) = geom.positions[from];
    let (xt, yt) = geom.positions[to];
    let y_avg = 0.5 * (yf + yt);
    let dx = xt - xf;
    -(2.0 * std::f64::consts::PI * flux_ratio / 5.0) * y_avg * dx
}

/// Assemble the device Hamiltonian with hopping magnitude `gamma` on every
/// edge and Peierls phases set by `flux_ratio` = phi / phi_0.
pub fn build_device_hamiltonian(
    geom: &DeviceGeometry,
    gamma: f64,
    flux_ratio: f64,
) -> Result<DeviceHamiltonian> {
    if gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "hopping energy gamma must be positive, got {gamma}"
        )));
    }
    let mut matrix = DMatrix::<C64>::zeros(N_SITES, N_SITES);
    for &(a, b) in &geom.edges {
        let theta = hop_phase(geom, a, b, flux_ratio);
        let t = -gamma * C64::new(theta.cos(), theta.sin());
        matrix[(b, a)] = t;
        matrix[(a, b)] = t.conj();
    }
    Ok(DeviceHamiltonian {
        matrix,
        gamma,
        flux_ratio,
    })
}

/// Add static potential scatterers V_s on the given sites (diagonal terms).
pub fn add_static_scatterers(
    h: &DeviceHamiltonian,
    sites: &[SiteIndex],
    v_s: f64,
) -> DeviceHamiltonian {
    let mut out = h.clone();
    for site in sites {
        out.matrix[(site.offset(), site.offset())] += C64::new(v_s, 0.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Shoelace area of a polygon, the independent oracle for the enclosed
    /// loop area.
    fn shoelace(vertices: &[(f64, f64)]) -> f64 {
        let n = vertices.len();
        let mut twice_area = 0.0;
        for i in 0..n {
            let (x0, y0) = vertices[i];
            let (x1, y1) = vertices[(i + 1) % n];
            twice_area += x0 * y1 - x1 * y0;
        }
        twice_area.abs() / 2.0
    }

    /// The closed loop 15 -> 16 -> .. -> 20 -> 26 -> 25 -> .. -> 21 -> 15
    /// as zero-based offsets.
    fn loop_sites() -> Vec<usize> {
        let mut l = vec![14];
        l.extend(15..20); // 16..=20
        l.push(25); // 26
        l.extend((20..25).rev()); // 25..=21
        l
    }

    #[test]
    fn geometry_matches_layout() {
        let g = build_geometry();
        assert_eq!(g.positions.len(), N_SITES);
        // site 1 at the origin, site 16 at (15, +1/2)
        assert_eq!(g.positions[0], (0.0, 0.0));
        assert_eq!(g.positions[15], (15.0, 0.5));
        assert_eq!(g.positions[20], (15.0, -0.5));
        assert_eq!(g.output_site, OUTPUT_SITE);
    }

    #[test]
    fn geometry_edge_count_and_degrees() {
        let g = build_geometry();
        assert_eq!(g.edges.len(), 35);
        assert_eq!(g.degree(SiteIndex::new(1).unwrap()), 1);
        assert_eq!(g.degree(SiteIndex::new(35).unwrap()), 1);
        assert_eq!(g.degree(SiteIndex::new(15).unwrap()), 3);
        assert_eq!(g.degree(SiteIndex::new(26).unwrap()), 3);
        for j in (2..=34).filter(|&j| j != 15 && j != 26) {
            assert_eq!(g.degree(SiteIndex::new(j).unwrap()), 2, "site {j}");
        }
    }

    #[test]
    fn enclosed_loop_area_is_five() {
        let g = build_geometry();
        let verts: Vec<(f64, f64)> = [14, 15, 19, 25, 24, 20]
            .iter()
            .map(|&s| g.positions[s])
            .collect();
        assert_abs_diff_eq!(shoelace(&verts), 5.0, epsilon = 1e-14);
    }

    #[test]
    fn branch_label_aliases() {
        assert_eq!(BranchLabel::top(1).unwrap().device_site().get(), 16);
        assert_eq!(BranchLabel::top(5).unwrap().device_site().get(), 20);
        assert_eq!(BranchLabel::bottom(1).unwrap().device_site().get(), 21);
        assert_eq!(BranchLabel::bottom(5).unwrap().device_site().get(), 25);
        let parsed: BranchLabel = "3'".parse().unwrap();
        assert_eq!(parsed, BranchLabel::bottom(3).unwrap());
        assert_eq!(parsed.to_string(), "3'");
        assert!("6".parse::<BranchLabel>().is_err());
        assert!("x'".parse::<BranchLabel>().is_err());
    }

    #[test]
    fn zero_flux_hamiltonian_is_real() {
        let g = build_geometry();
        let h = build_device_hamiltonian(&g, 1.0, 0.0).unwrap();
        for v in h.matrix.iter() {
            assert_eq!(v.im, 0.0);
        }
        // every edge carries -gamma
        for &(a, b) in &g.edges {
            assert_eq!(h.matrix[(a, b)], C64::new(-1.0, 0.0));
        }
    }

    fn loop_phase_sum(h: &DeviceHamiltonian) -> f64 {
        let l = loop_sites();
        let mut sum = 0.0;
        for i in 0..l.len() {
            let from = l[i];
            let to = l[(i + 1) % l.len()];
            // phase of the directed hop factor, hop magnitude is gamma
            let t = h.matrix[(to, from)];
            sum += (-t).arg();
        }
        sum
    }

    #[test]
    fn half_flux_loop_phase_is_minus_pi() {
        let g = build_geometry();
        let h = build_device_hamiltonian(&g, 1.0, 0.5).unwrap();
        let sum = loop_phase_sum(&h);
        let wrapped = (sum + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI)
            - std::f64::consts::PI;
        assert_abs_diff_eq!(wrapped, -std::f64::consts::PI, epsilon = 1e-12);
        // per-hop phase on a top horizontal bond is -pi * flux / 5
        let t = h.matrix[(16, 15)];
        assert_abs_diff_eq!(
            (-t).arg(),
            -std::f64::consts::PI * 0.5 / 5.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn loop_phase_tracks_flux() {
        // directed phase product equals exp(-i 2 pi flux) for random fluxes
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = build_geometry();
        for _ in 0..100 {
            let f: f64 = rng.random_range(-3.0..3.0);
            let h = build_device_hamiltonian(&g, 1.0, f).unwrap();
            let l = loop_sites();
            let mut prod = C64::new(1.0, 0.0);
            for i in 0..l.len() {
                let t = h.matrix[(l[(i + 1) % l.len()], l[i])];
                prod *= -t; // hop factor with the -gamma sign stripped
            }
            let expected = C64::new(0.0, -2.0 * std::f64::consts::PI * f).exp();
            assert!((prod - expected).norm() < 1e-10, "flux {f}");
        }
    }

    #[test]
    fn hermiticity_over_random_fluxes() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let g = build_geometry();
        for _ in 0..20 {
            let f: f64 = rng.random_range(-2.0..2.0);
            let h = build_device_hamiltonian(&g, 1.0, f).unwrap();
            let herm_err = (&h.matrix - h.matrix.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(herm_err < 1e-12);
            // diagonal is zero, off-edge entries are zero
            for j in 0..N_SITES {
                assert_eq!(h.matrix[(j, j)], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn scatterers_add_to_diagonal() {
        let g = build_geometry();
        let h = build_device_hamiltonian(&g, 1.0, 0.25).unwrap();
        let none = add_static_scatterers(&h, &[], 7.0);
        assert_eq!(none.matrix, h.matrix);
        let zero = add_static_scatterers(&h, &[SiteIndex::new(1).unwrap()], 0.0);
        assert_eq!(zero.matrix, h.matrix);

        let labels = ["1", "1'", "3", "3'", "5", "5'"];
        let sites: Vec<SiteIndex> = labels
            .iter()
            .map(|s| s.parse::<BranchLabel>().unwrap().device_site())
            .collect();
        let hs = add_static_scatterers(&h, &sites, 5.0);
        for j in [16u32, 18, 20, 21, 23, 25] {
            let o = SiteIndex::new(j).unwrap().offset();
            assert_eq!(hs.matrix[(o, o)], C64::new(5.0, 0.0));
        }
        let herm_err = (&hs.matrix - hs.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(herm_err < 1e-12);
    }

    #[test]
    fn rejects_bad_gamma() {
        let g = build_geometry();
        assert!(build_device_hamiltonian(&g, 0.0, 0.0).is_err());
        assert!(build_device_hamiltonian(&g, -1.0, 0.0).is_err());
    }
}
