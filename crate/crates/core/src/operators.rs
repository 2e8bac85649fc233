//! System operators: embedded Pauli matrices, collective spin, Dicke states of
//! the maximal-`l` sector, the m-body noise operator and the three-level
//! battery operators.
//!
//! Qubit basis convention: site 1 is the most significant bit of the basis
//! index and the excited state `|e>` is bit value 0, so index 0 is the
//! all-excited state `|L/2, L/2>`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::{ComplexMatrix, HermitianOperator, C64, ONE, ZERO};

/// Dense many-qubit operators are only built up to this many particles.
pub const MAX_DENSE_PARTICLES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CollectiveAxis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LadderSign {
    Raise,
    Lower,
}

fn check_particles(particles: usize) -> Result<()> {
    if particles == 0 {
        return Err(Error::invalid("particle count must be at least 1"));
    }
    if particles > MAX_DENSE_PARTICLES {
        return Err(Error::DimensionOverflow {
            particles,
            max: MAX_DENSE_PARTICLES,
        });
    }
    Ok(())
}

#[inline]
fn excited(index: usize, site_bit: usize) -> bool {
    index & (1 << site_bit) == 0
}

/// Number of excited qubits in a computational basis state.
#[inline]
pub fn excitation_count(index: usize, particles: usize) -> usize {
    particles - (index.count_ones() as usize)
}

/// Pauli matrix on `site` (1-based) of an `particles`-qubit register.
pub fn pauli(axis: Axis, site: usize, particles: usize) -> Result<HermitianOperator> {
    check_particles(particles)?;
    if site == 0 || site > particles {
        return Err(Error::invalid(format!(
            "site {site} outside 1..={particles}"
        )));
    }
    let bit = particles - site;
    let dim = 1usize << particles;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let up = excited(col, bit);
        match axis {
            Axis::Z => m[(col, col)] = C64::new(if up { 1.0 } else { -1.0 }, 0.0),
            Axis::X => m[(col ^ (1 << bit), col)] = ONE,
            // <e|sigma_y|g> = -i, <g|sigma_y|e> = +i
            Axis::Y => {
                m[(col ^ (1 << bit), col)] = if up { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) }
            }
        }
    }
    HermitianOperator::new(m)
}

/// Collective spin `J_a = (1/2) sum_i sigma_a^(i)`, and `J_pm = J_x pm i J_y`.
pub fn collective_j(axis: CollectiveAxis, particles: usize) -> Result<ComplexMatrix> {
    check_particles(particles)?;
    let dim = 1usize << particles;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        if axis == CollectiveAxis::Z {
            let k = excitation_count(col, particles) as f64;
            m[(col, col)] = C64::new(k - particles as f64 / 2.0, 0.0);
            continue;
        }
        for bit in 0..particles {
            let row = col ^ (1 << bit);
            let up = excited(col, bit);
            let value = match axis {
                CollectiveAxis::X => C64::new(0.5, 0.0),
                CollectiveAxis::Y => C64::new(0.0, if up { 0.5 } else { -0.5 }),
                CollectiveAxis::Plus if !up => ONE,
                CollectiveAxis::Minus if up => ONE,
                _ => continue,
            };
            m[(row, col)] += value;
        }
    }
    Ok(m)
}

/// Hermitian collective spin component.
pub fn collective_hermitian(axis: Axis, particles: usize) -> Result<HermitianOperator> {
    let a = match axis {
        Axis::X => CollectiveAxis::X,
        Axis::Y => CollectiveAxis::Y,
        Axis::Z => CollectiveAxis::Z,
    };
    HermitianOperator::new(collective_j(a, particles)?)
}

/// `|L/2, M>` labelled by `2M`, which keeps half-integers exact.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DickeIndex {
    particles: usize,
    twice_m: i64,
}

impl DickeIndex {
    pub fn new(particles: usize, m: f64) -> Result<Self> {
        let twice = 2.0 * m;
        if (twice - twice.round()).abs() > 1e-12 {
            return Err(Error::invalid(format!("m = {m} is not a half-integer")));
        }
        Self::from_twice_m(particles, twice.round() as i64)
    }

    pub fn from_twice_m(particles: usize, twice_m: i64) -> Result<Self> {
        let l2 = particles as i64;
        if twice_m.abs() > l2 || (l2 - twice_m) % 2 != 0 {
            return Err(Error::invalid(format!(
                "m = {}/2 is not on the ladder of {particles} particles",
                twice_m
            )));
        }
        Ok(Self { particles, twice_m })
    }

    /// The state with `excitations` excited qubits.
    pub fn from_excitations(particles: usize, excitations: usize) -> Result<Self> {
        if excitations > particles {
            return Err(Error::invalid("more excitations than particles"));
        }
        Self::from_twice_m(particles, 2 * excitations as i64 - particles as i64)
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn l_total(&self) -> f64 {
        self.particles as f64 / 2.0
    }

    pub fn twice_m(&self) -> i64 {
        self.twice_m
    }

    pub fn m(&self) -> f64 {
        self.twice_m as f64 / 2.0
    }

    pub fn excitations(&self) -> usize {
        ((self.particles as i64 + self.twice_m) / 2) as usize
    }

    /// Position in the ladder ordered from the top (`m = L/2` is 0).
    pub fn ladder_position(&self) -> usize {
        self.particles - self.excitations()
    }
}

/// Exact binomial coefficient; `None` on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// Symmetric Dicke state as a dense `2^L` vector.
pub fn dicke_state(index: DickeIndex) -> Result<Vec<C64>> {
    let particles = index.particles();
    check_particles(particles)?;
    let k = index.excitations();
    let count = binomial(particles as u64, k as u64).expect("small binomial") as f64;
    let amp = C64::new(count.sqrt().recip(), 0.0);
    Ok((0..1usize << particles)
        .map(|i| if excitation_count(i, particles) == k { amp } else { ZERO })
        .collect())
}

/// `C_{m,pm}^2 = (L/2 -+ m)(L/2 +- m + 1)` from the doubled quantities.
pub(crate) fn ladder_coefficient_sq(particles: usize, twice_m: i64, sign: LadderSign) -> f64 {
    let l2 = particles as f64;
    let m2 = twice_m as f64;
    match sign {
        LadderSign::Raise => 0.25 * (l2 - m2) * (l2 + m2 + 2.0),
        LadderSign::Lower => 0.25 * (l2 + m2) * (l2 - m2 + 2.0),
    }
}

/// Matrix element of `J_pm` between neighbouring Dicke states.
pub fn ladder_coefficient(index: DickeIndex, sign: LadderSign) -> f64 {
    ladder_coefficient_sq(index.particles(), index.twice_m(), sign).sqrt()
}

/// Collective spin restricted to the maximal-`l` Dicke sector, in the basis
/// `|L/2>, |L/2 - 1>, ..., |-L/2>` (ladder position order). No size cap.
pub fn dicke_sector_j(axis: CollectiveAxis, particles: usize) -> Result<ComplexMatrix> {
    if particles == 0 {
        return Err(Error::invalid("particle count must be at least 1"));
    }
    let n = particles + 1;
    let l2 = particles as i64;
    let twice_m = |p: usize| l2 - 2 * p as i64;
    let mut m = ComplexMatrix::zeros(n, n);
    for p in 0..n {
        let tm = twice_m(p);
        if axis == CollectiveAxis::Z {
            m[(p, p)] = C64::new(tm as f64 / 2.0, 0.0);
            continue;
        }
        let up = ladder_coefficient_sq(particles, tm, LadderSign::Raise).sqrt();
        let down = ladder_coefficient_sq(particles, tm, LadderSign::Lower).sqrt();
        // J_+ moves position p -> p - 1, J_- moves p -> p + 1
        let (to_up, to_down) = match axis {
            CollectiveAxis::Plus => (C64::new(up, 0.0), ZERO),
            CollectiveAxis::Minus => (ZERO, C64::new(down, 0.0)),
            CollectiveAxis::X => (C64::new(0.5 * up, 0.0), C64::new(0.5 * down, 0.0)),
            CollectiveAxis::Y => (C64::new(0.0, -0.5 * up), C64::new(0.0, 0.5 * down)),
            CollectiveAxis::Z => unreachable!(),
        };
        if p > 0 {
            m[(p - 1, p)] = to_up;
        }
        if p + 1 < n {
            m[(p + 1, p)] = to_down;
        }
    }
    Ok(m)
}

/// `A = (g L / C(L,m)) sum_{|S| = m} prod_{i in S} sigma_x^(i)`, normalized so
/// that `|A| = g L`.
pub fn m_body_noise(particles: usize, order: usize, coupling: f64) -> Result<HermitianOperator> {
    check_particles(particles)?;
    if order == 0 || order > particles {
        return Err(Error::invalid(format!(
            "interaction order {order} outside 1..={particles}"
        )));
    }
    let dim = 1usize << particles;
    let subsets = binomial(particles as u64, order as u64).expect("small binomial") as f64;
    let weight = C64::new(coupling * particles as f64 / subsets, 0.0);
    let masks: Vec<usize> = (0..dim).filter(|m| m.count_ones() as usize == order).collect();
    let mut a = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        for &mask in &masks {
            a[(col ^ mask, col)] = weight;
        }
    }
    HermitianOperator::new(a)
}

/// Single three-level particle in the basis `(|1>, |0>, |-1>)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BatteryOperators {
    pub hamiltonian: HermitianOperator,
    /// `|0><1| + |1><0|`
    pub sigma_plus_x: HermitianOperator,
    /// `|0><-1| + |-1><0|`
    pub sigma_minus_x: HermitianOperator,
}

pub fn battery_operators(e1: f64, e0: f64, em1: f64) -> Result<BatteryOperators> {
    if !(em1 < e1 && e1 < e0) {
        return Err(Error::invalid(format!(
            "battery levels need E_-1 < E_1 < E_0, got ({e1}, {e0}, {em1})"
        )));
    }
    let swap = |a: usize, b: usize| {
        let mut m = ComplexMatrix::zeros(3, 3);
        m[(a, b)] = ONE;
        m[(b, a)] = ONE;
        HermitianOperator::new(m)
    };
    Ok(BatteryOperators {
        hamiltonian: HermitianOperator::from_real_diagonal(&[e1, e0, em1]),
        sigma_plus_x: swap(0, 1)?,
        sigma_minus_x: swap(1, 2)?,
    })
}

/// `op^{(x) L}`
pub fn tensor_power(op: &ComplexMatrix, particles: usize) -> ComplexMatrix {
    let mut out = op.clone();
    for _ in 1..particles {
        out = out.kron(op);
    }
    out
}

/// `sum_i op^(i)` for a single-site operator on `particles` sites.
pub fn site_sum(op: &ComplexMatrix, particles: usize) -> ComplexMatrix {
    let d = op.rows();
    let id = ComplexMatrix::identity(d);
    let mut total = ComplexMatrix::zeros(d.pow(particles as u32), d.pow(particles as u32));
    for site in 0..particles {
        let mut term = if site == 0 { op.clone() } else { id.clone() };
        for s in 1..particles {
            term = term.kron(if s == site { op } else { &id });
        }
        total += &term;
    }
    total
}
