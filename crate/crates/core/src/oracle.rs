//! Brute-force reference for the decoherence tensor.
//!
//! Each momentum pair `(k, -k)`, `0 < k < N/2`, is evolved explicitly as a 2×2
//! Hamiltonian on {both empty, both occupied}:
//!
//! ```text
//! H_k = [[ -ε_k,      -iγ s_k ],
//!        [ +iγ s_k,    +ε_k   ]],     s_k = sin(2πk/N), ε_k = cos(2πk/N) - Λ
//! ```
//!
//! Ground states come from the block's own eigenvectors and the propagators
//! from its spectral decomposition, so nothing here touches the mixing angles
//! or the closed-form product in [`crate::decoherence`]. The two unpaired
//! modes `k = 0` and `k = -N/2` only contribute phases
//! `e^{-i(ε_bra - ε_ket)(n - 1/2)t}` with `n = 1` iff the bare `ε < 0`.

use std::f64::consts::PI;

use crate::decoherence::DecoherenceTensor;
use crate::spectrum::{BranchIndex, ChainParams, CouplingParams};
use crate::{Error, Result, C64};

/// Largest chain the oracle accepts.
pub const MAX_ORACLE_SITES: usize = 4096;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

type Mat2 = [[C64; 2]; 2];
type Vec2 = [C64; 2];

/// Even-parity Hamiltonian of one momentum pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairBlock {
    pub k: i64,
    pub hamiltonian: Mat2,
}

impl PairBlock {
    pub fn new(k: i64, chain: &ChainParams, field: f64) -> Result<Self> {
        let half = (chain.n_sites() / 2) as i64;
        if k <= 0 || k >= half {
            return Err(Error::MomentumOutOfRange { k, n_sites: chain.n_sites() });
        }
        let q = 2.0 * PI * k as f64 / chain.n_sites() as f64;
        let eps = q.cos() - field;
        let pairing = chain.gamma() * q.sin();
        let hamiltonian = [[C64::new(-eps, 0.0), -I * pairing], [I * pairing, C64::new(eps, 0.0)]];
        Ok(PairBlock { k, hamiltonian })
    }

    /// Eigenvalues in ascending order, from the characteristic polynomial.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let h = &self.hamiltonian;
        let mean = 0.5 * (h[0][0].re + h[1][1].re);
        let half_diff = 0.5 * (h[0][0].re - h[1][1].re);
        let r = half_diff.hypot(h[0][1].norm());
        [mean - r, mean + r]
    }

    /// Normalised eigenvector for `eigenvalue`, first nonzero component real positive.
    fn eigenvector(&self, eigenvalue: f64) -> Vec2 {
        let h = &self.hamiltonian;
        // (H - E) v = 0: take the better conditioned of the two row equations
        let row0 = [h[0][1], -(h[0][0] - eigenvalue)];
        let row1 = [h[1][1] - eigenvalue, -h[1][0]];
        let n0 = row0[0].norm_sqr() + row0[1].norm_sqr();
        let n1 = row1[0].norm_sqr() + row1[1].norm_sqr();
        let (v, n) = if n0 >= n1 { (row0, n0) } else { (row1, n1) };
        let n = n.sqrt();
        let mut v = [v[0] / n, v[1] / n];
        let lead = if v[0].norm() > 1e-300 { v[0] } else { v[1] };
        let phase = lead.conj() / lead.norm();
        v = [v[0] * phase, v[1] * phase];
        v
    }

    /// `e^{-iHt}` from the spectral decomposition.
    pub fn propagator(&self, t: f64) -> Mat2 {
        if t == 0.0 {
            return [[ONE, ZERO], [ZERO, ONE]];
        }
        let [lo, hi] = self.eigenvalues();
        if hi - lo == 0.0 {
            // H is a multiple of the identity
            let p = C64::cis(-lo * t);
            return [[p, ZERO], [ZERO, p]];
        }
        let vl = self.eigenvector(lo);
        let vh = self.eigenvector(hi);
        let (pl, ph) = (C64::cis(-lo * t), C64::cis(-hi * t));
        let mut u = [[ZERO; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                u[r][c] = pl * vl[r] * vl[c].conj() + ph * vh[r] * vh[c].conj();
            }
        }
        u
    }
}

/// Ground state of the pair block at `field`; fails on an exactly gapless block.
pub fn pair_ground_state(k: i64, chain: &ChainParams, field: f64) -> Result<Vec2> {
    let block = PairBlock::new(k, chain, field)?;
    let [lo, hi] = block.eigenvalues();
    if hi - lo == 0.0 {
        return Err(Error::DegenerateBlock { k, field });
    }
    Ok(block.eigenvector(lo))
}

/// Branch field computed directly from the sign rule, independent of
/// [`crate::spectrum::lambda_eff`].
fn branch_field(chain: &ChainParams, coupling: &CouplingParams, b: BranchIndex) -> f64 {
    let sa = if b.i() == 1 { 1.0 } else { -1.0 };
    let sb = if b.j() == 1 { 1.0 } else { -1.0 };
    chain.lambda() + sa * 2.0 * coupling.g + sb * 2.0 * coupling.h
}

fn check_size(chain: &ChainParams) -> Result<()> {
    if chain.n_sites() > MAX_ORACLE_SITES {
        return Err(Error::param("n_sites", format!("oracle supports at most {MAX_ORACLE_SITES} sites")));
    }
    Ok(())
}

fn apply(m: &Mat2, v: &Vec2) -> Vec2 {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}

fn dot(a: &Vec2, b: &Vec2) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// `⟨φ| e^{-iH_bra t} e^{iH_ket t} |φ⟩` with `φ` the bare ground state.
///
/// Each pair block is built from real-symmetric data up to a fixed unitary,
/// so this ordering agrees with `⟨φ| e^{iH_ket t} e^{-iH_bra t} |φ⟩`.
pub fn oracle_gamma(
    chain: &ChainParams,
    coupling: &CouplingParams,
    bra: BranchIndex,
    ket: BranchIndex,
    t: f64,
) -> Result<C64> {
    check_size(chain)?;
    let n = chain.n_sites();
    let half = (n / 2) as i64;
    let bare = chain.lambda();
    let (f_bra, f_ket) = (branch_field(chain, coupling, bra), branch_field(chain, coupling, ket));
    if t == 0.0 || f_bra == f_ket {
        // no evolution, or identical propagators that cancel
        return Ok(ONE);
    }

    let mut acc = ONE;
    for k in 1..half {
        let ground = pair_ground_state(k, chain, bare)?;
        let forward = PairBlock::new(k, chain, f_ket)?.propagator(-t);
        let backward = PairBlock::new(k, chain, f_bra)?.propagator(t);
        let evolved = apply(&backward, &apply(&forward, &ground));
        acc *= dot(&ground, &evolved);
    }
    for k in [0, -half] {
        let cos = (2.0 * PI * k as f64 / n as f64).cos();
        let occupied = if cos - bare < 0.0 { 1.0 } else { 0.0 };
        let (e_bra, e_ket) = (cos - f_bra, cos - f_ket);
        acc *= C64::cis(-(e_bra - e_ket) * (occupied - 0.5) * t);
    }
    Ok(acc)
}

/// All sixteen oracle entries at one time.
pub fn oracle_tensor(chain: &ChainParams, coupling: &CouplingParams, t: f64) -> Result<DecoherenceTensor> {
    let mut out = DecoherenceTensor::ones(t);
    for a in BranchIndex::ALL {
        for b in BranchIndex::ALL {
            out.entries[a.index()][b.index()] = oracle_gamma(chain, coupling, a, b, t)?;
        }
    }
    Ok(out)
}

/// `∏_{0<k<N/2} |⟨g_k^A | g_k^B⟩|` from explicit pair ground states.
pub fn oracle_overlap(
    chain: &ChainParams,
    coupling: &CouplingParams,
    branch_a: BranchIndex,
    branch_b: BranchIndex,
) -> Result<f64> {
    check_size(chain)?;
    let half = (chain.n_sites() / 2) as i64;
    let (fa, fb) = (branch_field(chain, coupling, branch_a), branch_field(chain, coupling, branch_b));
    let mut acc = 1.0;
    for k in 1..half {
        let ga = pair_ground_state(k, chain, fa)?;
        let gb = pair_ground_state(k, chain, fb)?;
        acc *= dot(&ga, &gb).norm();
    }
    Ok(acc)
}
