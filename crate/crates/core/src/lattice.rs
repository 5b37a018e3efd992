//! Lattices, potentials and Hamiltonians.
//!
//! Sites of Λ = {0..L-1}^d are indexed row-major. A bond is a (site, offset)
//! pair with the offset taken from the lexicographically positive half of the
//! potential's support; on the torus this makes |E_Λ| = (support/2)·|Λ| even
//! for tiny sides (an L = 2 periodic chain bonds the same pair twice).

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Boundary condition of the finite volume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Boundary {
    /// Empty exterior (all −1 Ising walls).
    Zero,
    /// Torus.
    Periodic,
    /// Occupied exterior sites γ (+1 walls there, −1 elsewhere).
    Fixed(Vec<Vec<i64>>),
}

/// A hypercubic box Λ = {0..L-1}^d with a boundary condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    d: usize,
    l: usize,
    boundary: Boundary,
}

impl LatticeSpec {
    pub fn new(d: usize, l: usize, boundary: Boundary) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension", "must be >= 1"));
        }
        if l < 2 {
            return Err(Error::invalid("side", "must be >= 2"));
        }
        if (l as f64).powi(d as i32) > 1e9 {
            return Err(Error::invalid("side", "L^d exceeds 1e9 sites"));
        }
        let spec = LatticeSpec { d, l, boundary };
        if let Boundary::Fixed(g) = &spec.boundary {
            for site in g {
                if site.len() != d {
                    return Err(Error::invalid("boundary", format!("γ site {site:?} has wrong dimension")));
                }
                if spec.index(site).is_some() {
                    return Err(Error::invalid("boundary", format!("γ site {site:?} lies inside Λ")));
                }
            }
        }
        Ok(spec)
    }

    pub fn chain(l: usize, boundary: Boundary) -> Result<Self> {
        Self::new(1, l, boundary)
    }

    pub fn dim(&self) -> usize {
        self.d
    }
    pub fn side(&self) -> usize {
        self.l
    }
    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }
    pub fn is_periodic(&self) -> bool {
        self.boundary == Boundary::Periodic
    }

    /// |Λ| = L^d.
    pub fn size(&self) -> usize {
        self.l.pow(self.d as u32)
    }

    pub fn coords(&self, mut i: usize) -> Vec<i64> {
        let mut c = vec![0i64; self.d];
        for k in (0..self.d).rev() {
            c[k] = (i % self.l) as i64;
            i /= self.l;
        }
        c
    }

    /// Index of an in-box coordinate, `None` outside Λ.
    pub fn index(&self, c: &[i64]) -> Option<usize> {
        let mut i = 0usize;
        for &x in c {
            if x < 0 || x >= self.l as i64 {
                return None;
            }
            i = i * self.l + x as usize;
        }
        Some(i)
    }

    fn wrap(&self, c: &[i64]) -> usize {
        let l = self.l as i64;
        let w: Vec<i64> = c.iter().map(|&x| x.rem_euclid(l)).collect();
        self.index(&w).expect("wrapped coordinate is inside")
    }

    fn shifted(&self, i: usize, delta: &[i64]) -> Vec<i64> {
        self.coords(i).iter().zip(delta).map(|(a, b)| a + b).collect()
    }

    /// Interior bonds (with multiplicity on the torus).
    pub fn bonds(&self, pot: &Potential) -> Vec<(usize, usize)> {
        let half = pot.half_offsets(self.d);
        let mut out = Vec::new();
        for i in 0..self.size() {
            for delta in &half {
                let c = self.shifted(i, delta);
                if self.is_periodic() {
                    out.push((i, self.wrap(&c)));
                } else if let Some(j) = self.index(&c) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Bonds from an interior site to an exterior one (empty on the torus).
    pub fn exterior_bonds(&self, pot: &Potential) -> Vec<(usize, Vec<i64>)> {
        if self.is_periodic() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for i in 0..self.size() {
            for delta in pot.offsets(self.d) {
                let c = self.shifted(i, &delta);
                if self.index(&c).is_none() {
                    out.push((i, c));
                }
            }
        }
        out
    }

    /// |E_Λ|: interior bonds plus bonds to exterior spins.
    pub fn edge_count(&self, pot: &Potential) -> usize {
        self.bonds(pot).len() + self.exterior_bonds(pot).len()
    }

    fn is_gamma(&self, c: &[i64]) -> bool {
        match &self.boundary {
            Boundary::Fixed(g) => g.iter().any(|s| s.as_slice() == c),
            _ => false,
        }
    }

    /// Number of bonds from site `i` to occupied exterior sites.
    pub fn gamma_bonds(&self, i: usize, pot: &Potential) -> usize {
        if !matches!(self.boundary, Boundary::Fixed(_)) {
            return 0;
        }
        pot.offsets(self.d)
            .iter()
            .filter(|delta| {
                let c = self.shifted(i, delta);
                self.index(&c).is_none() && self.is_gamma(&c)
            })
            .count()
    }

    /// Number of bonds between two interior sites (0, 1, or 2 on a 2-torus).
    pub fn bond_multiplicity(&self, i: usize, j: usize, pot: &Potential) -> usize {
        if i == j {
            return 0;
        }
        let half = pot.half_offsets(self.d);
        let hits = |a: usize, b: usize| {
            half.iter()
                .filter(|delta| {
                    let c = self.shifted(a, delta);
                    if self.is_periodic() {
                        self.wrap(&c) == b
                    } else {
                        self.index(&c) == Some(b)
                    }
                })
                .count()
        };
        hits(i, j) + hits(j, i)
    }

    /// Minimum-image Euclidean distance on the torus (plain distance otherwise).
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.coords(i), self.coords(j));
        let l = self.l as i64;
        a.iter()
            .zip(&b)
            .map(|(x, y)| {
                let mut t = (x - y).abs();
                if self.is_periodic() {
                    t = t.min(l - t);
                }
                (t * t) as f64
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Distance from site `i` to the complement Λ^c in the l¹ metric.
    pub fn l1_distance_to_exterior(&self, i: usize) -> i64 {
        let l = self.l as i64;
        self.coords(i).iter().map(|&x| (x + 1).min(l - x)).min().unwrap_or(0)
    }
}

/// Pair potential: hard core at 0, an attractive well inside the support.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Potential {
    /// Nearest neighbours, V = −4J.
    Standard { j: f64 },
    /// Range-R Kac well with the indicator kernel, V = −4 for 0 < |x| ≤ R.
    Kac { range: u32 },
}

/// A potential value, with the hard core kept apart from floating infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Energy {
    Finite(f64),
    Excluded,
}

impl Energy {
    /// Boltzmann weight; exactly 0 for excluded configurations (any β ≥ 0).
    pub fn weight(self, beta: f64) -> f64 {
        match self {
            Energy::Finite(e) => (-beta * e).exp(),
            Energy::Excluded => 0.0,
        }
    }
    pub fn is_excluded(self) -> bool {
        self == Energy::Excluded
    }
}

impl Potential {
    pub fn standard(j: f64) -> Result<Self> {
        if !(j > 0.0 && j.is_finite()) {
            return Err(Error::invalid("coupling", "J must be a positive finite real"));
        }
        Ok(Potential::Standard { j })
    }

    pub fn kac(range: u32) -> Result<Self> {
        if range == 0 {
            return Err(Error::invalid("potential.range", "R must be >= 1"));
        }
        Ok(Potential::Kac { range })
    }

    /// Ising coupling per bond (J, or 1 for the Kac kernel).
    pub fn coupling(&self) -> f64 {
        match *self {
            Potential::Standard { j } => j,
            Potential::Kac { .. } => 1.0,
        }
    }

    /// Depth ε of the well: V = −ε inside the support.
    pub fn depth(&self) -> f64 {
        4.0 * self.coupling()
    }

    pub fn range(&self) -> u32 {
        match *self {
            Potential::Standard { .. } => 1,
            Potential::Kac { range } => range,
        }
    }

    /// All offsets δ ≠ 0 with |δ| ≤ range.
    pub fn offsets(&self, d: usize) -> Vec<Vec<i64>> {
        let r = self.range() as i64;
        let mut out = Vec::new();
        let mut cur = vec![-r; d];
        loop {
            let n2: i64 = cur.iter().map(|x| x * x).sum();
            if n2 > 0 && n2 <= r * r {
                out.push(cur.clone());
            }
            let mut k = 0;
            loop {
                if k == d {
                    return out;
                }
                cur[k] += 1;
                if cur[k] <= r {
                    break;
                }
                cur[k] = -r;
                k += 1;
            }
        }
    }

    /// Offsets whose first non-zero component is positive.
    pub fn half_offsets(&self, d: usize) -> Vec<Vec<i64>> {
        self.offsets(d)
            .into_iter()
            .filter(|v| v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0))
            .collect()
    }

    /// Number of sites a particle interacts with.
    pub fn support_size(&self, d: usize) -> usize {
        self.offsets(d).len()
    }

    /// V(δ) on Z^d.
    pub fn eval(&self, delta: &[i64]) -> Energy {
        let n2: i64 = delta.iter().map(|x| x * x).sum();
        let r = self.range() as i64;
        if n2 == 0 {
            Energy::Excluded
        } else if n2 <= r * r {
            Energy::Finite(-self.depth())
        } else {
            Energy::Finite(0.0)
        }
    }

    /// Checks the potential fits inside the box (R^d < |Λ|; 2R < L on the torus).
    pub fn check_fits(&self, lat: &LatticeSpec) -> Result<()> {
        if let Potential::Kac { range } = *self {
            let r = range as f64;
            if r.powi(lat.dim() as i32) >= lat.size() as f64 {
                return Err(Error::invalid("potential.range", "need R^d < |Λ|"));
            }
            if lat.is_periodic() && 2 * range as usize >= lat.side() {
                return Err(Error::invalid("potential.range", "need 2R < L on the torus"));
            }
        }
        Ok(())
    }
}

/// Stability and regularity constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    /// Stability constant B.
    pub b: f64,
    /// Regularity constant C(β).
    pub c: f64,
    /// Tree-graph constant C̄(β).
    pub c_bar: f64,
}

/// B = ε·n, C = n(e^{βε}−1)+1, C̄ = 1+n(1−e^{−βε}), n the support size
/// (n = 2d for nearest neighbours, giving B = 8Jd).
pub fn model_constants(d: usize, pot: &Potential, beta: f64) -> Result<ModelConstants> {
    if !(beta >= 0.0) {
        return Err(Error::invalid("beta", "must be >= 0"));
    }
    let n = pot.support_size(d) as f64;
    let eps = pot.depth();
    Ok(ModelConstants {
        b: eps * n,
        c: n * (beta * eps).exp_m1() + 1.0,
        c_bar: 1.0 - n * (-beta * eps).exp_m1(),
    })
}

/// σ = 2η − 1.
pub fn occupancy_to_spins(eta: &[u8]) -> Result<Vec<i8>> {
    eta.iter()
        .map(|&e| match e {
            0 => Ok(-1),
            1 => Ok(1),
            _ => Err(Error::invalid("occupancy", format!("value {e} not in {{0,1}}"))),
        })
        .collect()
}

/// η = (σ + 1)/2.
pub fn spins_to_occupancy(spins: &[i8]) -> Result<Vec<u8>> {
    spins
        .iter()
        .map(|&s| match s {
            -1 => Ok(0),
            1 => Ok(1),
            _ => Err(Error::invalid("spin", format!("value {s} not in {{-1,+1}}"))),
        })
        .collect()
}

/// Magnetization m = Σσ/|Λ|.
pub fn magnetization(spins: &[i8]) -> f64 {
    spins.iter().map(|&s| s as f64).sum::<f64>() / spins.len() as f64
}

fn check_len(lat: &LatticeSpec, n: usize) -> Result<()> {
    if n != lat.size() {
        return Err(Error::invalid("spins", format!("expected {} sites, got {n}", lat.size())));
    }
    Ok(())
}

/// H = −J Σ_{E_Λ} σσ′, exterior spins being −1 except +1 on γ.
pub fn ising_hamiltonian(spins: &[i8], lat: &LatticeSpec, pot: &Potential) -> Result<f64> {
    check_len(lat, spins.len())?;
    spins_to_occupancy(spins)?;
    let w = pot.coupling();
    let mut h = 0.0;
    for (i, j) in lat.bonds(pot) {
        h -= w * (spins[i] * spins[j]) as f64;
    }
    for (i, c) in lat.exterior_bonds(pot) {
        let s_ext = if lat.is_gamma(&c) { 1.0 } else { -1.0 };
        h -= w * spins[i] as f64 * s_ext;
    }
    Ok(h)
}

/// Σ_{i<j} V(x_i − x_j) + Σ_{i,j} V(x_i − γ_j); `Excluded` on coincidence.
pub fn lattice_gas_hamiltonian(particles: &[usize], lat: &LatticeSpec, pot: &Potential) -> Result<Energy> {
    let n = lat.size();
    if let Some(&bad) = particles.iter().find(|&&x| x >= n) {
        return Err(Error::invalid("particles", format!("site {bad} outside Λ (|Λ| = {n})")));
    }
    let eps = pot.depth();
    let mut e = 0.0;
    for a in 0..particles.len() {
        for b in a + 1..particles.len() {
            if particles[a] == particles[b] {
                return Ok(Energy::Excluded);
            }
            e -= eps * lat.bond_multiplicity(particles[a], particles[b], pot) as f64;
        }
        e -= eps * lat.gamma_bonds(particles[a], pot) as f64;
    }
    Ok(Energy::Finite(e))
}

/// Ising energy vs its lattice-gas rewriting
/// H_gas^γ(η) + 2J·n·N − J|E_Λ| + 2J·n_γ  (n the support size, n_γ the
/// number of bonds to +1 walls). Both sides agree exactly.
pub fn spin_gas_energy_identity(spins: &[i8], lat: &LatticeSpec, pot: &Potential) -> Result<(f64, f64)> {
    let lhs = ising_hamiltonian(spins, lat, pot)?;
    let eta = spins_to_occupancy(spins)?;
    let particles: Vec<usize> = (0..eta.len()).filter(|&i| eta[i] == 1).collect();
    let gas = match lattice_gas_hamiltonian(&particles, lat, pot)? {
        Energy::Finite(e) => e,
        Energy::Excluded => unreachable!("distinct sites"),
    };
    Ok((lhs, gas + ising_offset(lat, pot, particles.len())))
}

/// Constant relating the Ising and gas energies at fixed N.
pub fn ising_offset(lat: &LatticeSpec, pot: &Potential, n_particles: usize) -> f64 {
    let w = pot.coupling();
    let n_sup = pot.support_size(lat.dim()) as f64;
    let n_gamma: usize = (0..lat.size()).map(|i| lat.gamma_bonds(i, pot)).sum();
    2.0 * w * n_sup * n_particles as f64 - w * lat.edge_count(pot) as f64 + 2.0 * w * n_gamma as f64
}

/// ν_Λ(x|γ) = e^{−β Σ_j V(x − γ_j)}.
pub fn boundary_weight(x: usize, lat: &LatticeSpec, pot: &Potential, beta: f64) -> Result<f64> {
    if x >= lat.size() {
        return Err(Error::invalid("site", format!("{x} outside Λ")));
    }
    Ok((beta * pot.depth() * lat.gamma_bonds(x, pot) as f64).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std1() -> Potential {
        Potential::standard(1.0).unwrap()
    }

    #[test]
    fn sizes_and_edges() {
        let t = LatticeSpec::new(2, 2, Boundary::Periodic).unwrap();
        assert_eq!(t.size(), 4);
        assert_eq!(t.edge_count(&std1()), 8);
        let all_up = vec![1i8; 4];
        assert_eq!(ising_hamiltonian(&all_up, &t, &std1()).unwrap(), -8.0);
        // open chain: 1 interior + 2 wall bonds
        let c = LatticeSpec::chain(2, Boundary::Zero).unwrap();
        assert_eq!(c.edge_count(&std1()), 3);
        let j = 1.5;
        let p = Potential::standard(j).unwrap();
        assert_eq!(ising_hamiltonian(&[1, 1], &c, &p).unwrap(), -j + 2.0 * j);
        assert_eq!(ising_hamiltonian(&[-1, -1], &c, &p).unwrap(), -3.0 * j);
    }

    #[test]
    fn flip_changes_by_coordination() {
        let lat = LatticeSpec::new(2, 3, Boundary::Zero).unwrap();
        let p = std1();
        let base = vec![-1i8; 9];
        let e0 = ising_hamiltonian(&base, &lat, &p).unwrap();
        for x in 0..9 {
            let mut s = base.clone();
            s[x] = 1;
            let e1 = ising_hamiltonian(&s, &lat, &p).unwrap();
            // walls count as neighbours: coordination is always 2d
            assert_eq!(e1 - e0, 2.0 * 4.0);
        }
    }

    #[test]
    fn gas_energies() {
        let lat = LatticeSpec::chain(5, Boundary::Zero).unwrap();
        let p = Potential::standard(0.7).unwrap();
        assert_eq!(lattice_gas_hamiltonian(&[1, 2], &lat, &p).unwrap(), Energy::Finite(-4.0 * 0.7));
        assert_eq!(lattice_gas_hamiltonian(&[1, 3], &lat, &p).unwrap(), Energy::Finite(0.0));
        assert_eq!(lattice_gas_hamiltonian(&[2, 2], &lat, &p).unwrap(), Energy::Excluded);
        assert!(lattice_gas_hamiltonian(&[7], &lat, &p).is_err());
    }

    #[test]
    fn identity_examples() {
        let p = std1();
        let lat = LatticeSpec::chain(3, Boundary::Zero).unwrap();
        let (l, r) = spin_gas_energy_identity(&[-1, -1, -1], &lat, &p).unwrap();
        assert_eq!(l, -(lat.edge_count(&p) as f64));
        assert_eq!(l, r);
        let (l, r) = spin_gas_energy_identity(&[-1, 1, -1], &lat, &p).unwrap();
        assert_eq!(l, r);
    }

    #[test]
    fn boundary_weights() {
        let beta = 0.3;
        let p = std1();
        let lat = LatticeSpec::new(2, 4, Boundary::Fixed(vec![vec![-1, 0], vec![0, -1], vec![-1, 2]])).unwrap();
        let e4 = (4.0f64 * beta).exp();
        assert_eq!(boundary_weight(lat.index(&[1, 1]).unwrap(), &lat, &p, beta).unwrap(), 1.0);
        assert!((boundary_weight(lat.index(&[0, 2]).unwrap(), &lat, &p, beta).unwrap() - e4).abs() < 1e-14);
        assert!((boundary_weight(0, &lat, &p, beta).unwrap() - e4 * e4).abs() < 1e-13);
        assert!(LatticeSpec::new(1, 3, Boundary::Fixed(vec![vec![1]])).is_err());
    }

    #[test]
    fn constants() {
        let p = std1();
        let k = model_constants(2, &p, 0.25).unwrap();
        let e = 1f64.exp();
        assert_eq!(k.b, 16.0);
        assert!((k.c - (4.0 * (e - 1.0) + 1.0)).abs() < 1e-14);
        assert!((k.c_bar - (1.0 + 4.0 * (1.0 - 1.0 / e))).abs() < 1e-14);
        let k0 = model_constants(3, &Potential::standard(2.0).unwrap(), 0.0).unwrap();
        assert_eq!((k0.c, k0.c_bar), (1.0, 1.0));
        let kac = model_constants(1, &Potential::kac(3).unwrap(), 0.5).unwrap();
        assert_eq!(kac.b, 24.0);
        assert!((kac.c_bar - (1.0 + 6.0 * (1.0 - (-2f64).exp()))).abs() < 1e-14);
        assert!((kac.c - (6.0 * (2f64.exp() - 1.0) + 1.0)).abs() < 1e-12);
        assert!(model_constants(1, &p, -1.0).is_err());
    }

    #[test]
    fn kac_support() {
        let k = Potential::kac(1).unwrap();
        assert_eq!(k.support_size(3), 6);
        assert_eq!(Potential::kac(4).unwrap().support_size(1), 8);
        // d = 2, R = 2: 12 sites in the closed disc minus origin
        assert_eq!(Potential::kac(2).unwrap().support_size(2), 12);
        let lat = LatticeSpec::chain(6, Boundary::Periodic).unwrap();
        assert!(Potential::kac(3).unwrap().check_fits(&lat).is_err());
        assert!(Potential::kac(2).unwrap().check_fits(&lat).is_ok());
    }

    #[test]
    fn spin_validation() {
        assert!(spins_to_occupancy(&[1, 0]).is_err());
        assert!(occupancy_to_spins(&[2]).is_err());
        let lat = LatticeSpec::chain(2, Boundary::Zero).unwrap();
        assert!(ising_hamiltonian(&[1, 2], &lat, &std1()).is_err());
    }
}
