//! Free-fermion spectral data of the XY chain.
//!
//! After the Jordan-Wigner and Fourier steps every effective chain Hamiltonian
//! is characterised by three numbers per momentum `k ∈ {-N/2, …, N/2-1}`:
//!
//! ```text
//! ε_k = cos(2πk/N) - Λ
//! ω_k = sqrt(ε_k² + γ² sin²(2πk/N))
//! θ_k = atan2(γ sin(2πk/N), ε_k)        (so cos θ_k = ε_k / ω_k)
//! ```
//!
//! where `Λ` is the field seen by the chain. The probes shift it from the bare
//! `λ` to `Λ_ij = λ + (-1)^(i+1) 2g + (-1)^(j+1) 2h` depending on their basis
//! state `|ij⟩`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// Bare chain parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChainParams {
    n_sites: usize,
    gamma: f64,
    lambda: f64,
}

impl ChainParams {
    /// `n_sites` must be even and at least 4 so the momentum grid is well formed.
    pub fn new(n_sites: usize, gamma: f64, lambda: f64) -> Result<Self> {
        if n_sites < 4 {
            return Err(Error::param("n_sites", format!("must be >= 4, got {n_sites}")));
        }
        if !n_sites.is_multiple_of(2) {
            return Err(Error::param("n_sites", format!("must be even, got {n_sites}")));
        }
        if !gamma.is_finite() {
            return Err(Error::param("gamma", "must be finite"));
        }
        if !lambda.is_finite() {
            return Err(Error::param("lambda", "must be finite"));
        }
        Ok(ChainParams { n_sites, gamma, lambda })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// Anisotropy `γ`.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Transverse field `λ`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.n_sites, self.gamma, lambda)
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.n_sites, gamma, self.lambda)
    }

    /// Momenta `-N/2 ..= N/2-1` in ascending order.
    pub fn momenta(&self) -> impl Iterator<Item = i64> {
        let half = (self.n_sites / 2) as i64;
        -half..half
    }

    pub fn contains_momentum(&self, k: i64) -> bool {
        let half = (self.n_sites / 2) as i64;
        (-half..half).contains(&k)
    }
}

/// Probe-chain couplings and the probes' own level splittings.
///
/// `omega_a` / `omega_b` only rotate local phases and never enter the
/// decoherence tensor; they are kept so that invariance can be checked.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingParams {
    pub g: f64,
    pub h: f64,
    pub omega_a: f64,
    pub omega_b: f64,
}

impl CouplingParams {
    pub fn new(g: f64, h: f64) -> Result<Self> {
        Self::with_splittings(g, h, 0.0, 0.0)
    }

    pub fn with_splittings(g: f64, h: f64, omega_a: f64, omega_b: f64) -> Result<Self> {
        for (name, v) in [("g", g), ("h", h), ("omega_a", omega_a), ("omega_b", omega_b)] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        Ok(CouplingParams { g, h, omega_a, omega_b })
    }

    /// The `g ↔ h` mirror image (probes relabelled).
    pub fn swapped(&self) -> Self {
        CouplingParams { g: self.h, h: self.g, omega_a: self.omega_b, omega_b: self.omega_a }
    }
}

/// Probe basis state `|ij⟩`, which selects the effective chain Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BranchIndex {
    i: u8,
    j: u8,
}

impl BranchIndex {
    pub const B00: BranchIndex = BranchIndex { i: 0, j: 0 };
    pub const B01: BranchIndex = BranchIndex { i: 0, j: 1 };
    pub const B10: BranchIndex = BranchIndex { i: 1, j: 0 };
    pub const B11: BranchIndex = BranchIndex { i: 1, j: 1 };

    /// All four branches in basis order `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub const ALL: [BranchIndex; 4] = [Self::B00, Self::B01, Self::B10, Self::B11];

    /// The six unordered off-diagonal pairs in tensor order.
    pub const OFF_DIAGONAL: [(BranchIndex, BranchIndex); 6] = [
        (Self::B00, Self::B01),
        (Self::B00, Self::B10),
        (Self::B00, Self::B11),
        (Self::B01, Self::B10),
        (Self::B01, Self::B11),
        (Self::B10, Self::B11),
    ];

    pub fn new(i: u8, j: u8) -> Result<Self> {
        if i > 1 || j > 1 {
            return Err(Error::param("branch", format!("bits must be 0 or 1, got ({i}, {j})")));
        }
        Ok(BranchIndex { i, j })
    }

    pub fn from_index(idx: usize) -> Option<Self> {
        Self::ALL.get(idx).copied()
    }

    pub fn i(&self) -> u8 {
        self.i
    }

    pub fn j(&self) -> u8 {
        self.j
    }

    /// Position in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub fn index(&self) -> usize {
        (2 * self.i + self.j) as usize
    }

    /// Branch with the two probe labels exchanged.
    pub fn swapped(&self) -> Self {
        BranchIndex { i: self.j, j: self.i }
    }

    fn sign(bit: u8) -> f64 {
        if bit == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

impl fmt::Display for BranchIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.i, self.j)
    }
}

impl FromStr for BranchIndex {
    type Err = Error;

    /// Two bits, e.g. `"01"`.
    fn from_str(s: &str) -> Result<Self> {
        let bits: Vec<u8> = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(()),
            })
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::param("branch", format!("expected two bits like `01`, got `{s}`")))?;
        match bits[..] {
            [i, j] => Ok(BranchIndex { i, j }),
            _ => Err(Error::param("branch", format!("expected two bits like `01`, got `{s}`"))),
        }
    }
}

/// Field seen by the chain when the probes sit in `|ij⟩`.
///
/// Written as `λ + 2(s_i g + s_j h)` so that `g == h` makes the `01` and `10`
/// branches bit-for-bit equal to `λ`.
pub fn lambda_eff(branch: BranchIndex, chain: &ChainParams, coupling: &CouplingParams) -> f64 {
    let shift = BranchIndex::sign(branch.i) * coupling.g + BranchIndex::sign(branch.j) * coupling.h;
    chain.lambda + 2.0 * shift
}

/// `(cos, sin)` of `2πk/N`, exact at the symmetric points and exactly even/odd in `k`.
pub(crate) fn momentum_trig(k: i64, n_sites: usize) -> (f64, f64) {
    let m = k.unsigned_abs() as usize;
    let (c, s) = if m == 0 {
        (1.0, 0.0)
    } else if 2 * m == n_sites {
        (-1.0, 0.0)
    } else if 4 * m == n_sites {
        (0.0, 1.0)
    } else {
        let (s, c) = (2.0 * PI * m as f64 / n_sites as f64).sin_cos();
        (c, s)
    };
    if k < 0 {
        (c, -s)
    } else {
        (c, s)
    }
}

/// `(ε_k, ω_k)` for one momentum at the given effective field.
pub fn dispersion(k: i64, chain: &ChainParams, effective_field: f64) -> Result<(f64, f64)> {
    if !chain.contains_momentum(k) {
        return Err(Error::MomentumOutOfRange { k, n_sites: chain.n_sites });
    }
    let (c, s) = momentum_trig(k, chain.n_sites);
    let eps = c - effective_field;
    Ok((eps, eps.hypot(chain.gamma * s)))
}

/// Bogoliubov angle in `(-π, π]`; the fully degenerate point maps to `π`.
pub fn mixing_angle(epsilon: f64, gamma_sin: f64) -> f64 {
    if epsilon == 0.0 && gamma_sin == 0.0 {
        return PI;
    }
    let theta = gamma_sin.atan2(epsilon);
    // atan2(-0.0, x<0) is -π
    if theta == -PI {
        PI
    } else {
        theta
    }
}

/// Spectral data of one effective chain Hamiltonian over the full momentum grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTable {
    pub effective_field: f64,
    pub momenta: Vec<i64>,
    pub epsilon: Vec<f64>,
    pub omega: Vec<f64>,
    pub theta: Vec<f64>,
}

impl ModeTable {
    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    /// Row index of momentum `k` (`k + N/2`).
    pub fn index_of(&self, k: i64) -> Option<usize> {
        let half = (self.len() / 2) as i64;
        let idx = k + half;
        (0..self.len() as i64).contains(&idx).then_some(idx as usize)
    }

    /// Smallest single-mode frequency, i.e. the gap.
    pub fn min_omega(&self) -> f64 {
        self.omega.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn mode_table(chain: &ChainParams, effective_field: f64) -> ModeTable {
    let n = chain.n_sites;
    let mut table = ModeTable {
        effective_field,
        momenta: Vec::with_capacity(n),
        epsilon: Vec::with_capacity(n),
        omega: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
    };
    for k in chain.momenta() {
        let (c, s) = momentum_trig(k, n);
        let eps = c - effective_field;
        let gs = chain.gamma * s;
        table.momenta.push(k);
        table.epsilon.push(eps);
        table.omega.push(eps.hypot(gs));
        table.theta.push(mixing_angle(eps, gs));
    }
    table
}
