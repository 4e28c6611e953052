//! Harmonic phonons of the periodic crystal.
//!
//! Frequencies are in units of the in-plane trap frequency and the
//! dynamical matrix in units of its square.

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lattice::{bose_einstein, lattice_sums, neighbour_shell, LatticeSums, PhysicalParams, SQRT3};
use crate::{Error, Result};

/// Eigenvalues in [-EIGEN_CLAMP, 0] are treated as zero.
pub const EIGEN_CLAMP: f64 = 1e-9;

/// Grid wavevector with phases q_i = 2 pi n_i / L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WaveVector {
    pub n1: usize,
    pub n2: usize,
    pub l: usize,
}

impl WaveVector {
    pub fn new(n1: usize, n2: usize, l: usize) -> Result<Self> {
        if l == 0 || n1 >= l || n2 >= l {
            return Err(Error::OffGrid { n1, n2, l });
        }
        Ok(Self { n1, n2, l })
    }

    pub fn q1(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.n1 as f64 / self.l as f64
    }

    pub fn q2(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.n2 as f64 / self.l as f64
    }

    pub fn neg(&self) -> Self {
        Self {
            n1: (self.l - self.n1) % self.l,
            n2: (self.l - self.n2) % self.l,
            l: self.l,
        }
    }

    pub fn index(&self) -> usize {
        self.n1 * self.l + self.n2
    }

    pub fn is_zero(&self) -> bool {
        self.n1 == 0 && self.n2 == 0
    }

    /// Cartesian direction of the shortest equivalent reciprocal vector,
    /// or `None` at q = 0.
    pub fn direction(&self) -> Option<[f64; 2]> {
        if self.is_zero() {
            return None;
        }
        let l = self.l as i64;
        let (n1, n2) = (self.n1 as i64, self.n2 as i64);
        let mut best = (i64::MAX, 0, 0);
        for o1 in [-l, 0, l] {
            for o2 in [-l, 0, l] {
                let (m1, m2) = (n1 + o1, n2 + o2);
                let norm = m1 * m1 - m1 * m2 + m2 * m2;
                if norm < best.0 {
                    best = (norm, m1, m2);
                }
            }
        }
        let (m1, m2) = (best.1 as f64, best.2 as f64);
        let v = [m1, (2.0 * m2 - m1) / SQRT3];
        let n = v[0].hypot(v[1]);
        Some([v[0] / n, v[1] / n])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Axial,
    Longitudinal,
    Transverse,
}

impl Branch {
    pub fn is_in_plane(&self) -> bool {
        !matches!(self, Branch::Axial)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhononMode {
    pub q: WaveVector,
    pub branch: Branch,
    pub omega: f64,
    pub evec: [f64; 3],
    pub n_occ: f64,
}

/// Dipolar pair tensor (3 s_i s_j / |s|^2 - delta_ij) / |s|^3.
pub fn pair_tensor(s: [f64; 3]) -> Result<Matrix3<f64>> {
    let r2 = s[0] * s[0] + s[1] * s[1] + s[2] * s[2];
    if r2 == 0.0 {
        return Err(Error::ZeroDisplacement);
    }
    let r = r2.sqrt();
    let inv3 = 1.0 / (r2 * r);
    Ok(Matrix3::from_fn(|i, j| {
        let (a, b) = (i.min(j), i.max(j));
        let d = if i == j { 1.0 } else { 0.0 };
        (3.0 * s[a] * s[b] / r2 - d) * inv3
    }))
}

/// Precomputed minimum-image pair tensors of the L x L crystal.
#[derive(Debug, Clone)]
pub struct CrystalModel {
    pub l: usize,
    pub sums: LatticeSums,
    /// omega_z / omega_xy.
    pub z_ratio: f64,
    neighbours: Vec<Neighbour>,
    cos_table: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Neighbour {
    s1: i64,
    s2: i64,
    vxx: f64,
    vxy: f64,
    vyy: f64,
    vzz: f64,
}

impl CrystalModel {
    pub fn new(l: usize, z_ratio: f64) -> Result<Self> {
        if !(z_ratio.is_finite() && z_ratio > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "axial to in-plane frequency ratio must be positive, got {z_ratio}"
            )));
        }
        let sums = lattice_sums(l)?;
        let neighbours = neighbour_shell(l)
            .into_iter()
            .map(|d| {
                let v = pair_tensor(d.vec).expect("shell excludes the origin");
                Neighbour {
                    s1: d.frac.0,
                    s2: d.frac.1,
                    vxx: v[(0, 0)],
                    vxy: v[(0, 1)],
                    vyy: v[(1, 1)],
                    vzz: v[(2, 2)],
                }
            })
            .collect();
        // Mirror-symmetric table so that q and -q see bitwise equal cosines.
        let mut cos_table = vec![0.0; l];
        for m in 0..=l / 2 {
            let c = (2.0 * std::f64::consts::PI * m as f64 / l as f64).cos();
            cos_table[m] = c;
            cos_table[(l - m) % l] = c;
        }
        Ok(Self {
            l,
            sums,
            z_ratio,
            neighbours,
            cos_table,
        })
    }

    pub fn from_params(l: usize, params: &PhysicalParams) -> Result<Self> {
        params.validate()?;
        Self::new(l, params.z_ratio())
    }

    pub fn wavevector(&self, n1: usize, n2: usize) -> Result<WaveVector> {
        WaveVector::new(n1, n2, self.l)
    }

    /// Omega_q = diag(1, 1, (w_z/w_xy)^2) + (beta_xy/2) sum_s (1 - cos q.s) V_s.
    pub fn dynamical_matrix(&self, q: &WaveVector) -> Result<Matrix3<f64>> {
        if q.l != self.l {
            return Err(Error::OffGrid {
                n1: q.n1,
                n2: q.n2,
                l: self.l,
            });
        }
        let l = self.l as i64;
        let (n1, n2) = (q.n1 as i64, q.n2 as i64);
        let (mut xx, mut xy, mut yy, mut zz) = (0.0, 0.0, 0.0, 0.0);
        for nb in &self.neighbours {
            let phase = (n1 * nb.s1 + n2 * nb.s2).rem_euclid(l) as usize;
            let w = 1.0 - self.cos_table[phase];
            xx += w * nb.vxx;
            xy += w * nb.vxy;
            yy += w * nb.vyy;
            zz += w * nb.vzz;
        }
        let c = 0.5 * self.sums.beta_xy;
        let rz = self.z_ratio * self.z_ratio;
        Ok(Matrix3::new(
            1.0 + c * xx,
            c * xy,
            0.0,
            c * xy,
            1.0 + c * yy,
            0.0,
            0.0,
            0.0,
            rz + c * zz,
        ))
    }

    pub fn modes_at(&self, q: &WaveVector) -> Result<QModes> {
        let omega = self.dynamical_matrix(q)?;
        let eig = diagonalize(&omega)?;
        let branches = classify_all(q, &eig.evecs, &eig.omegas);
        Ok(QModes {
            q: *q,
            omegas: eig.omegas,
            evecs: eig.evecs,
            branches,
        })
    }

    /// Modes on the full grid. The entry for -q is a copy of the entry for q,
    /// so frequencies, labels and polarization signs agree exactly.
    pub fn spectrum(&self) -> Result<Spectrum> {
        let l = self.l;
        let canonical: Vec<usize> = (0..l * l)
            .filter(|&i| {
                let q = WaveVector { n1: i / l, n2: i % l, l };
                q.neg().index() >= i
            })
            .collect();
        let solved: Vec<QModes> = canonical
            .par_iter()
            .map(|&i| self.modes_at(&WaveVector { n1: i / l, n2: i % l, l }))
            .collect::<Result<_>>()?;
        let mut table: Vec<Option<QModes>> = vec![None; l * l];
        for m in solved {
            let neg = m.q.neg();
            table[neg.index()] = Some(QModes { q: neg, ..m });
            table[m.q.index()] = Some(m);
        }
        Ok(Spectrum {
            l,
            z_ratio: self.z_ratio,
            beta_xy: self.sums.beta_xy,
            modes: table.into_iter().map(|m| m.expect("every q filled")).collect(),
        })
    }

    /// Band structure along a path of grid wavevectors.
    pub fn band_structure(&self, path: &[WaveVector]) -> Result<BandStructure> {
        let mut out = BandStructure {
            path: path.to_vec(),
            axial: Vec::with_capacity(path.len()),
            longitudinal: Vec::with_capacity(path.len()),
            transverse: Vec::with_capacity(path.len()),
        };
        for q in path {
            if q.l != self.l || q.n1 >= self.l || q.n2 >= self.l {
                return Err(Error::OffGrid {
                    n1: q.n1,
                    n2: q.n2,
                    l: self.l,
                });
            }
            let m = self.modes_at(q)?;
            out.axial.push(m.omega_of(Branch::Axial));
            out.longitudinal.push(m.omega_of(Branch::Longitudinal));
            out.transverse.push(m.omega_of(Branch::Transverse));
        }
        Ok(out)
    }
}

/// Grid points along the Cartesian x direction: (2m mod L, m) for m = 0..=L/2.
pub fn x_direction_path(l: usize) -> Vec<WaveVector> {
    (0..=l / 2)
        .map(|m| WaveVector {
            n1: (2 * m) % l,
            n2: m % l,
            l,
        })
        .collect()
}

/// Every grid wavevector, n1 varying slowest.
pub fn full_grid(l: usize) -> Vec<WaveVector> {
    (0..l * l)
        .map(|i| WaveVector { n1: i / l, n2: i % l, l })
        .collect()
}

/// Three modes at one wavevector, frequencies ascending.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QModes {
    pub q: WaveVector,
    pub omegas: [f64; 3],
    pub evecs: [[f64; 3]; 3],
    pub branches: [Branch; 3],
}

impl QModes {
    pub fn omega_of(&self, branch: Branch) -> f64 {
        let i = self.branches.iter().position(|&b| b == branch).unwrap_or(0);
        self.omegas[i]
    }

    pub fn modes(&self, inverse_thermal_ratio: f64) -> [PhononMode; 3] {
        std::array::from_fn(|i| PhononMode {
            q: self.q,
            branch: self.branches[i],
            omega: self.omegas[i],
            evec: self.evecs[i],
            n_occ: bose_einstein(inverse_thermal_ratio * self.omegas[i]),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub l: usize,
    pub z_ratio: f64,
    pub beta_xy: f64,
    /// Indexed by `WaveVector::index`.
    pub modes: Vec<QModes>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub min_axial: f64,
    pub max_in_plane: f64,
    pub max_axial: f64,
    /// (max - min) of the axial band over omega_z.
    pub axial_fractional_bandwidth: f64,
    pub gap_ok: bool,
}

impl Spectrum {
    pub fn get(&self, q: &WaveVector) -> &QModes {
        &self.modes[q.index()]
    }

    pub fn gap_report(&self) -> GapReport {
        let mut min_axial = f64::INFINITY;
        let mut max_axial = f64::NEG_INFINITY;
        let mut max_in_plane = f64::NEG_INFINITY;
        for m in &self.modes {
            for i in 0..3 {
                if m.branches[i] == Branch::Axial {
                    min_axial = min_axial.min(m.omegas[i]);
                    max_axial = max_axial.max(m.omegas[i]);
                } else {
                    max_in_plane = max_in_plane.max(m.omegas[i]);
                }
            }
        }
        GapReport {
            min_axial,
            max_in_plane,
            max_axial,
            axial_fractional_bandwidth: (max_axial - min_axial) / self.z_ratio,
            gap_ok: min_axial > 2.0 * max_in_plane,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandStructure {
    pub path: Vec<WaveVector>,
    pub axial: Vec<f64>,
    pub longitudinal: Vec<f64>,
    pub transverse: Vec<f64>,
}

/// Frequencies and orthonormal polarizations of a symmetric 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenmodes {
    pub omegas: [f64; 3],
    pub evecs: [[f64; 3]; 3],
}

/// Diagonalizes Omega_q: omega = sqrt(eigenvalue), ascending.
///
/// Block-diagonal input (no xz or yz coupling) is solved in closed form so
/// that the axial polarization is exactly z. Each eigenvector is signed so
/// that its largest-magnitude component is positive.
pub fn diagonalize(omega: &Matrix3<f64>) -> Result<Eigenmodes> {
    let (mut vals, mut vecs) = if omega[(0, 2)] == 0.0 && omega[(1, 2)] == 0.0 {
        let (l1, l2, v1, v2) = sym2_eigen(omega[(0, 0)], omega[(0, 1)], omega[(1, 1)]);
        (
            [l1, l2, omega[(2, 2)]],
            [[v1[0], v1[1], 0.0], [v2[0], v2[1], 0.0], [0.0, 0.0, 1.0]],
        )
    } else {
        let eig = SymmetricEigen::new(*omega);
        let vals = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
        let vecs = std::array::from_fn(|k| {
            let c = eig.eigenvectors.column(k);
            [c[0], c[1], c[2]]
        });
        (vals, vecs)
    };
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let (v0, e0) = (vals, vecs);
    for (k, &o) in order.iter().enumerate() {
        vals[k] = v0[o];
        vecs[k] = e0[o];
    }
    let mut omegas = [0.0; 3];
    for k in 0..3 {
        let lam = vals[k];
        if lam < -EIGEN_CLAMP {
            return Err(Error::UnstableCrystal(lam));
        }
        omegas[k] = lam.max(0.0).sqrt();
        fix_sign(&mut vecs[k]);
    }
    Ok(Eigenmodes { omegas, evecs: vecs })
}

fn fix_sign(v: &mut [f64; 3]) {
    let mut imax = 0;
    for i in 1..3 {
        if v[i].abs() > v[imax].abs() {
            imax = i;
        }
    }
    if v[imax] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Closed-form eigen-decomposition of [[a, b], [b, c]], ascending.
fn sym2_eigen(a: f64, b: f64, c: f64) -> (f64, f64, [f64; 2], [f64; 2]) {
    if b == 0.0 {
        return if a <= c {
            (a, c, [1.0, 0.0], [0.0, 1.0])
        } else {
            (c, a, [0.0, 1.0], [1.0, 0.0])
        };
    }
    let mean = 0.5 * (a + c);
    let r = (0.5 * (a - c)).hypot(b);
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    let (s, co) = theta.sin_cos();
    (mean - r, mean + r, [-s, co], [co, s])
}

/// Axial if |e_z| > 1/sqrt(2); in-plane modes are longitudinal when their
/// projection on q is at least the projection on the perpendicular.
pub fn classify_branch(q: &WaveVector, evec: &[f64; 3]) -> Branch {
    if evec[2].abs() > std::f64::consts::FRAC_1_SQRT_2 {
        return Branch::Axial;
    }
    match q.direction() {
        None => Branch::Longitudinal,
        Some(d) => {
            let par = (d[0] * evec[0] + d[1] * evec[1]).abs();
            let perp = (-d[1] * evec[0] + d[0] * evec[1]).abs();
            if par >= perp {
                Branch::Longitudinal
            } else {
                Branch::Transverse
            }
        }
    }
}

/// Labels the three modes at q. The in-plane pair always gets one label of
/// each kind: at q = 0 by ascending frequency, elsewhere by the larger
/// projection on q.
fn classify_all(q: &WaveVector, evecs: &[[f64; 3]; 3], omegas: &[f64; 3]) -> [Branch; 3] {
    let mut labels = [Branch::Axial; 3];
    let in_plane: Vec<usize> = (0..3)
        .filter(|&k| classify_branch(q, &evecs[k]) != Branch::Axial)
        .collect();
    if in_plane.len() != 2 {
        for k in 0..3 {
            labels[k] = classify_branch(q, &evecs[k]);
        }
        return labels;
    }
    let (i, j) = (in_plane[0], in_plane[1]);
    let longitudinal_first = match q.direction() {
        None => omegas[i] <= omegas[j],
        Some(d) => {
            let proj = |k: usize| (d[0] * evecs[k][0] + d[1] * evecs[k][1]).abs();
            proj(i) >= proj(j)
        }
    };
    let (lo, tr) = if longitudinal_first { (i, j) } else { (j, i) };
    labels[lo] = Branch::Longitudinal;
    labels[tr] = Branch::Transverse;
    labels
}

/// Bose-Einstein occupation of a mode of frequency `omega` (units omega_xy).
pub fn occupation(omega: f64, params: &PhysicalParams) -> f64 {
    bose_einstein(omega * params.inverse_thermal_ratio())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_tensor_examples() {
        let v = pair_tensor([1.0, 0.0, 0.0]).unwrap();
        assert_eq!(v, Matrix3::from_diagonal(&nalgebra::Vector3::new(2.0, -1.0, -1.0)));
        let v = pair_tensor([0.0, 2.0, 0.0]).unwrap();
        let expect = Matrix3::from_diagonal(&nalgebra::Vector3::new(-1.0, 2.0, -1.0)) / 8.0;
        assert!((v - expect).abs().max() < 1e-15);
        assert_eq!(pair_tensor([0.0; 3]), Err(Error::ZeroDisplacement));
    }

    #[test]
    fn origin_matrix_is_trap_only() {
        let m = CrystalModel::new(6, 50.0).unwrap();
        let q = m.wavevector(0, 0).unwrap();
        let d = m.dynamical_matrix(&q).unwrap();
        assert_eq!(d, Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, 2500.0)));
        let modes = m.modes_at(&q).unwrap();
        assert_eq!(modes.omegas, [1.0, 1.0, 50.0]);
        assert_eq!(modes.evecs[2], [0.0, 0.0, 1.0]);
        assert_eq!(modes.branches, [Branch::Longitudinal, Branch::Transverse, Branch::Axial]);
    }

    #[test]
    fn branch_labels_along_x() {
        let q = WaveVector::new(2, 1, 12).unwrap();
        let d = q.direction().unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12 && d[1].abs() < 1e-12);
        assert_eq!(classify_branch(&q, &[0.0, 0.0, 1.0]), Branch::Axial);
        assert_eq!(classify_branch(&q, &[1.0, 0.0, 0.0]), Branch::Longitudinal);
        assert_eq!(classify_branch(&q, &[0.0, 1.0, 0.0]), Branch::Transverse);
    }

    #[test]
    fn off_grid_rejected() {
        assert!(WaveVector::new(4, 0, 4).is_err());
        let m = CrystalModel::new(4, 10.0).unwrap();
        let bad = WaveVector { n1: 5, n2: 0, l: 4 };
        assert!(m.band_structure(&[bad]).is_err());
    }

    #[test]
    fn single_point_band_structure() {
        let m = CrystalModel::new(8, 50.0).unwrap();
        let b = m.band_structure(&[m.wavevector(0, 0).unwrap()]).unwrap();
        assert_eq!((b.longitudinal[0], b.transverse[0], b.axial[0]), (1.0, 1.0, 50.0));
    }

    #[test]
    fn zero_temperature_occupation() {
        let p = PhysicalParams::beryllium(20e3, 1e6, 0.0).unwrap();
        assert_eq!(occupation(3.0, &p), 0.0);
    }

    #[test]
    fn unstable_matrix_detected() {
        let m = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, -0.5, 2.0));
        assert!(matches!(diagonalize(&m), Err(Error::UnstableCrystal(_))));
        let m = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, -1e-12, 2.0));
        assert_eq!(diagonalize(&m).unwrap().omegas[0], 0.0);
    }

    #[test]
    fn general_matrix_uses_full_solver() {
        let m = Matrix3::new(2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 3.0);
        let e = diagonalize(&m).unwrap();
        for k in 0..3 {
            let v = nalgebra::Vector3::from(e.evecs[k]);
            let r = m * v - v * e.omegas[k].powi(2);
            assert!(r.norm() < 1e-12);
        }
        assert!(e.omegas[0] <= e.omegas[1] && e.omegas[1] <= e.omegas[2]);
    }

    #[test]
    fn x_path_reaches_zone_boundary() {
        let p = x_direction_path(12);
        assert_eq!(p.len(), 7);
        assert_eq!((p[4].n1, p[4].n2), (8, 4));
        assert_eq!((p[6].n1, p[6].n2), (0, 6));
    }
}
