//! Decoherence tensor of the probe pair and the reduced probe state.
//!
//! With the chain starting in the ground state of the bare Hamiltonian, each
//! element of the probe density matrix evolves as
//!
//! ```text
//! ρ_{ij;mn}(t) = ρ_{ij;mn}(0) · Γ_{ij;mn}(t),   Γ_{ij;mn}(t) = ⟨φ| e^{iH_mn t} e^{-iH_ij t} |φ⟩
//! ```
//!
//! The chain factorises into independent two-level systems. A momentum pair
//! `(k, -k)` with `0 < k < N/2` lives in the even-parity span of
//! {both empty, both occupied} and has splitting `2ω_k`. The modes `k = 0` and
//! `k = -N/2` have no partner and are plain number-conserving levels with
//! splitting `ω_k`. For a two-level system of splitting `m·ω` the closed form
//! of the matrix element is
//!
//! ```text
//! e^{i m(ω_a - ω_b)t/2} · { 1 - (1 - e^{-i m ω_a t}) s_a² - (1 - e^{i m ω_b t}) s_b²
//!                          + (1 - e^{-i m ω_a t})(1 - e^{i m ω_b t}) s_a s_b cos((θ_a - θ_b)/2) }
//! ```
//!
//! with `s_x = sin((θ - θ_x)/2)` and `θ` the angle of the bare chain.
//! [`crate::oracle`] checks this against explicit 2×2 evolution.

use crate::linalg::{hermitian_eigen4, Matrix4};
use crate::spectrum::{lambda_eff, mode_table, BranchIndex, ChainParams, CouplingParams};
use crate::{Error, Result, C64};

const ONE: C64 = C64::new(1.0, 0.0);

/// `Γ_{ij;mn}(t)` for all sixteen branch pairs at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoherenceTensor {
    pub time: f64,
    /// Indexed `[bra.index()][ket.index()]`.
    pub entries: [[C64; 4]; 4],
}

impl DecoherenceTensor {
    pub fn ones(time: f64) -> Self {
        DecoherenceTensor { time, entries: [[ONE; 4]; 4] }
    }

    pub fn get(&self, bra: BranchIndex, ket: BranchIndex) -> C64 {
        self.entries[bra.index()][ket.index()]
    }

    /// Moduli of the six independent off-diagonal entries, in
    /// [`BranchIndex::OFF_DIAGONAL`] order.
    pub fn offdiag_abs(&self) -> [f64; 6] {
        BranchIndex::OFF_DIAGONAL.map(|(a, b)| self.get(a, b).norm())
    }

    pub fn as_matrix(&self) -> Matrix4 {
        Matrix4(self.entries)
    }
}

/// Probe-pair state in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix4(Matrix4);

impl DensityMatrix4 {
    /// Hermiticity and unit trace are checked to 1e-12, positivity to -1e-10.
    pub fn new(m: Matrix4) -> Result<Self> {
        Self::checked(m, 1e-10)
    }

    fn checked(m: Matrix4, psd_tol: f64) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::param("rho", "entries must be finite"));
        }
        let herm = m.hermiticity_error();
        if herm > 1e-12 {
            return Err(Error::param("rho", format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > 1e-12 {
            return Err(Error::param("rho", format!("trace must be 1, got {tr}")));
        }
        let (vals, _) = hermitian_eigen4(&m)?;
        if vals[0] < -psd_tol {
            return Err(Error::param("rho", format!("not positive semidefinite (eigenvalue {:e})", vals[0])));
        }
        Ok(DensityMatrix4(m))
    }

    /// `|ψ⟩⟨ψ|` for a state vector; the vector is normalised first.
    pub fn from_pure(psi: [C64; 4]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::param("psi", "state vector must be nonzero and finite"));
        }
        let psi = psi.map(|z| z / norm);
        Self::new(Matrix4::outer(&psi, &psi))
    }

    /// `|+⟩ ⊗ |+⟩`: every entry is 1/4.
    pub fn plus_plus() -> Self {
        DensityMatrix4(Matrix4::from_fn(|_, _| C64::new(0.25, 0.0)))
    }

    pub fn matrix(&self) -> &Matrix4 {
        &self.0
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[(r, c)]
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    /// Apply the probes' own evolution `e^{-iH_S t}` with
    /// `H_S = ω_a σ_a^z / 2 + ω_b σ_b^z / 2` (`|0⟩` is the `σ^z = +1` state).
    pub fn with_local_evolution(&self, coupling: &CouplingParams, t: f64) -> Self {
        let energy = |b: BranchIndex| {
            let za = 1.0 - 2.0 * b.i() as f64;
            let zb = 1.0 - 2.0 * b.j() as f64;
            0.5 * (coupling.omega_a * za + coupling.omega_b * zb)
        };
        let e = BranchIndex::ALL.map(energy);
        DensityMatrix4(Matrix4::from_fn(|r, c| self.0[(r, c)] * C64::cis(-(e[r] - e[c]) * t)))
    }
}

/// The initial probe state used throughout: `|+⟩|+⟩`.
pub fn initial_plus_plus() -> DensityMatrix4 {
    DensityMatrix4::plus_plus()
}

/// Entrywise product `ρ(t) = ρ(0) ∘ Γ(t)`.
///
/// The result is re-checked for positivity; a violation beyond 1e-8 means the
/// tensor is not a valid Gram matrix and is reported as a consistency failure.
pub fn evolve(rho0: &DensityMatrix4, tensor: &DecoherenceTensor) -> Result<DensityMatrix4> {
    let m = rho0.0.hadamard(&tensor.as_matrix());
    let (vals, _) = hermitian_eigen4(&m)?;
    if vals[0] < -1e-8 {
        return Err(Error::Consistency(format!("evolved state has eigenvalue {:e} at t = {}", vals[0], tensor.time)));
    }
    let tr = m.trace();
    if (tr - ONE).norm() > 1e-12 || m.hermiticity_error() > 1e-12 {
        return Err(Error::Consistency(format!("evolved state lost trace or Hermiticity at t = {}", tensor.time)));
    }
    Ok(DensityMatrix4(m))
}

/// Precomputed per-mode data for the bare chain and the four probe branches.
///
/// Modes are stored as "channels" in a fixed order: `k = -N/2`, `k = 0`
/// (splitting `ω`), then `k = 1 .. N/2-1` (pairs, splitting `2ω`). Products
/// are always accumulated in this order.
#[derive(Clone, Debug)]
pub struct BranchSpectra {
    chain: ChainParams,
    fields: [f64; 4],
    /// splitting multiplier per channel (1 or 2)
    mult: Vec<f64>,
    /// `ω` per branch per channel
    omega: [Vec<f64>; 4],
    /// `sin((θ_bare - θ_branch)/2)` per branch per channel
    sin_half: [Vec<f64>; 4],
    /// `cos((θ_a - θ_b)/2)` per off-diagonal pair per channel
    cos_half: [Vec<f64>; 6],
}

impl BranchSpectra {
    pub fn new(chain: &ChainParams, coupling: &CouplingParams) -> Self {
        let n = chain.n_sites();
        let half = n / 2;
        // table index of momentum k is k + N/2
        let mut order = Vec::with_capacity(half + 1);
        order.push(0usize);
        order.push(half);
        order.extend(half + 1..n);
        let mult: Vec<f64> = order.iter().map(|&i| if i == 0 || i == half { 1.0 } else { 2.0 }).collect();

        let base = mode_table(chain, chain.lambda());
        let fields = BranchIndex::ALL.map(|b| lambda_eff(b, chain, coupling));
        let tables = fields.map(|f| mode_table(chain, f));

        let omega = std::array::from_fn(|b| order.iter().map(|&i| tables[b].omega[i]).collect());
        let sin_half = std::array::from_fn(|b| {
            order.iter().map(|&i| ((base.theta[i] - tables[b].theta[i]) / 2.0).sin()).collect()
        });
        let cos_half = std::array::from_fn(|p| {
            let (a, b) = BranchIndex::OFF_DIAGONAL[p];
            let (ta, tb) = (&tables[a.index()].theta, &tables[b.index()].theta);
            order.iter().map(|&i| ((ta[i] - tb[i]) / 2.0).cos()).collect()
        });
        BranchSpectra { chain: *chain, fields, mult, omega, sin_half, cos_half }
    }

    pub fn chain(&self) -> &ChainParams {
        &self.chain
    }

    pub fn effective_field(&self, branch: BranchIndex) -> f64 {
        self.fields[branch.index()]
    }

    /// `e^{i m ω t / 2}` for every channel of one branch.
    fn half_phases(&self, branch: BranchIndex, t: f64) -> Vec<C64> {
        self.omega[branch.index()].iter().zip(&self.mult).map(|(&w, &m)| C64::cis(0.5 * m * w * t)).collect()
    }

    fn pair_slot(a: BranchIndex, b: BranchIndex) -> usize {
        let key = if a < b { (a, b) } else { (b, a) };
        BranchIndex::OFF_DIAGONAL.iter().position(|&p| p == key).expect("off-diagonal pair")
    }

    fn product(&self, bra: BranchIndex, ket: BranchIndex, ua: &[C64], ub: &[C64]) -> C64 {
        let sa = &self.sin_half[bra.index()];
        let sb = &self.sin_half[ket.index()];
        let cross = &self.cos_half[Self::pair_slot(bra, ket)];
        let mut acc = ONE;
        for c in 0..ua.len() {
            acc *= mode_factor(ua[c], ub[c], sa[c], sb[c], cross[c]);
        }
        acc
    }

    /// `Γ_{bra;ket}(t)`. Branches with identical effective fields give exactly 1.
    pub fn factor(&self, bra: BranchIndex, ket: BranchIndex, t: f64) -> C64 {
        if self.fields[bra.index()] == self.fields[ket.index()] {
            return ONE;
        }
        let ua = self.half_phases(bra, t);
        let ub = self.half_phases(ket, t);
        self.product(bra, ket, &ua, &ub)
    }

    /// All sixteen entries; six products are evaluated and mirrored.
    pub fn tensor(&self, t: f64) -> DecoherenceTensor {
        let phases = BranchIndex::ALL.map(|b| self.half_phases(b, t));
        let mut out = DecoherenceTensor::ones(t);
        for (a, b) in BranchIndex::OFF_DIAGONAL {
            let v = if self.fields[a.index()] == self.fields[b.index()] {
                ONE
            } else {
                self.product(a, b, &phases[a.index()], &phases[b.index()])
            };
            out.entries[a.index()][b.index()] = v;
            out.entries[b.index()][a.index()] = v.conj();
        }
        out
    }

    /// Ground-state overlap of two branch Hamiltonians over the paired modes.
    pub fn overlap(&self, a: BranchIndex, b: BranchIndex) -> f64 {
        if a == b {
            return 1.0;
        }
        // paired channels start after the two unpaired ones
        self.cos_half[Self::pair_slot(a, b)][2..].iter().product()
    }
}

/// One two-level factor of the closed form; `ua = e^{i m ω_a t/2}`, `ub` likewise.
#[inline]
fn mode_factor(ua: C64, ub: C64, sa: f64, sb: f64, cross: f64) -> C64 {
    let ea = ONE - ua.conj() * ua.conj();
    let eb = ONE - ub * ub;
    let bracket = ONE - ea * (sa * sa) - eb * (sb * sb) + ea * eb * (sa * sb * cross);
    ua * ub.conj() * bracket
}

/// `Γ_{bra;ket}(t)` for one branch pair.
pub fn gamma_factor(chain: &ChainParams, coupling: &CouplingParams, bra: BranchIndex, ket: BranchIndex, t: f64) -> C64 {
    BranchSpectra::new(chain, coupling).factor(bra, ket, t)
}

pub fn gamma_tensor(chain: &ChainParams, coupling: &CouplingParams, t: f64) -> DecoherenceTensor {
    BranchSpectra::new(chain, coupling).tensor(t)
}

/// `∏_{0<k<N/2} cos((θ_{A,k} - θ_{B,k})/2)`: overlap of the ground states of
/// the two branch Hamiltonians in the paired-mode sector.
pub fn ground_state_overlap(
    chain: &ChainParams,
    coupling: &CouplingParams,
    branch_a: BranchIndex,
    branch_b: BranchIndex,
) -> f64 {
    if branch_a == branch_b {
        return 1.0;
    }
    let ta = mode_table(chain, lambda_eff(branch_a, chain, coupling));
    let tb = mode_table(chain, lambda_eff(branch_b, chain, coupling));
    let half = chain.n_sites() / 2;
    (half + 1..chain.n_sites()).map(|i| ((ta.theta[i] - tb.theta[i]) / 2.0).cos()).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn setup(n: usize, gamma: f64, lambda: f64, g: f64, h: f64) -> (ChainParams, CouplingParams) {
        (ChainParams::new(n, gamma, lambda).unwrap(), CouplingParams::new(g, h).unwrap())
    }

    /// Same closed form without the equal-field shortcut, to exercise the identity.
    fn raw_factor(spec: &BranchSpectra, bra: BranchIndex, ket: BranchIndex, t: f64) -> C64 {
        let ua = spec.half_phases(bra, t);
        let ub = spec.half_phases(ket, t);
        if bra == ket {
            let sa = &spec.sin_half[bra.index()];
            return (0..ua.len()).map(|c| mode_factor(ua[c], ub[c], sa[c], sa[c], 1.0)).product();
        }
        spec.product(bra, ket, &ua, &ub)
    }

    #[test]
    fn zero_time_is_identity() {
        let (c, cp) = setup(16, 0.6, 0.4, 0.03, 0.08);
        let tensor = gamma_tensor(&c, &cp, 0.0);
        for row in tensor.entries {
            for z in row {
                assert_eq!(z, ONE);
            }
        }
        assert_eq!(gamma_factor(&c, &cp, BranchIndex::B11, BranchIndex::B00, 0.0), ONE);
    }

    #[test]
    fn diagonal_is_identity_without_shortcut() {
        let (c, cp) = setup(64, 0.8, 0.9, 0.04, 0.07);
        let spec = BranchSpectra::new(&c, &cp);
        for b in BranchIndex::ALL {
            for t in [0.3, 2.0, 9.5] {
                assert!((raw_factor(&spec, b, b, t) - ONE).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn decoherence_free_subspace_is_exact() {
        let (c, cp) = setup(1502, 1.0, 0.8, 0.05, 0.05);
        let tensor = gamma_tensor(&c, &cp, 3.7);
        assert_eq!(tensor.get(BranchIndex::B01, BranchIndex::B10), ONE);
        assert_eq!(tensor.get(BranchIndex::B10, BranchIndex::B01), ONE);
    }

    #[test]
    fn xx_limit_preserves_moduli() {
        let (c, cp) = setup(256, 0.0, 0.35, 0.06, 0.02);
        for t in [0.5, 4.0, 10.0] {
            for z in gamma_tensor(&c, &cp, t).entries.iter().flatten() {
                assert!((z.norm() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn tensor_matches_single_factors() {
        let (c, cp) = setup(32, 0.5, -0.3, 0.02, 0.09);
        let tensor = gamma_tensor(&c, &cp, 1.7);
        for a in BranchIndex::ALL {
            for b in BranchIndex::ALL {
                let z = gamma_factor(&c, &cp, a, b, 1.7);
                assert!((tensor.get(a, b) - z).norm() < 1e-14, "{a}{b}");
            }
        }
    }

    #[test]
    fn large_field_leaves_only_local_phases() {
        // Deep in the paramagnet the chain is nearly a product state and the
        // tensor is close to a pure phase. Most of that phase is additive in
        // the two probe labels (an effective local field); the non-additive
        // part comes from the curvature of the ground energy in the field and
        // grows only by about 1e-4 per unit time here.
        let (c, cp) = setup(1502, 1.0, 50.0, 0.05, 0.05);
        let spec = BranchSpectra::new(&c, &cp);
        for step in 0..=20 {
            let t = step as f64 * 0.5;
            let tensor = spec.tensor(t);
            for z in tensor.entries.iter().flatten() {
                assert!((z.norm() - 1.0).abs() < 1e-3);
            }
            let nonlocal =
                tensor.get(BranchIndex::B00, BranchIndex::B01) * tensor.get(BranchIndex::B10, BranchIndex::B11).conj();
            assert!((nonlocal - ONE).norm() < 2e-3, "t={t}: {nonlocal}");
        }
    }

    #[test]
    fn plus_plus_state() {
        let rho = initial_plus_plus();
        assert!((rho.trace() - ONE).norm() < 1e-15);
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(rho.get(r, c), C64::new(0.25, 0.0));
            }
        }
        assert!(DensityMatrix4::new(*rho.matrix()).is_ok());
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = *initial_plus_plus().matrix();
        m[(0, 1)] = C64::new(0.25, 0.1);
        assert!(DensityMatrix4::new(m).is_err());
        let neg = Matrix4::diag([1.2, -0.2, 0.0, 0.0].map(|x| C64::new(x, 0.0)));
        assert!(DensityMatrix4::new(neg).is_err());
        let half = Matrix4::diag([0.5, 0.0, 0.0, 0.0].map(|x| C64::new(x, 0.0)));
        assert!(DensityMatrix4::new(half).is_err());
    }

    #[test]
    fn evolve_with_ones_is_identity() {
        let rho = DensityMatrix4::from_pure([0.3, -0.2, 0.5, 0.1].map(|x| C64::new(x, x * 0.5))).unwrap();
        let out = evolve(&rho, &DecoherenceTensor::ones(0.0)).unwrap();
        assert_eq!(out, rho);
    }

    #[test]
    fn evolve_unit_modulus_tensor_keeps_quarter_moduli() {
        let (c, cp) = setup(128, 0.0, 0.6, 0.05, 0.05);
        let out = evolve(&initial_plus_plus(), &gamma_tensor(&c, &cp, 2.5)).unwrap();
        for r in 0..4 {
            for col in 0..4 {
                assert!((out.get(r, col).norm() - 0.25).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn evolve_at_ising_parameters_is_valid_state() {
        let (c, cp) = setup(1502, 1.0, 0.8, 0.05, 0.05);
        for t in [0.75, 2.0, 6.0] {
            let out = evolve(&initial_plus_plus(), &gamma_tensor(&c, &cp, t)).unwrap();
            assert!((out.trace() - ONE).norm() < 1e-12);
            let (vals, _) = hermitian_eigen4(out.matrix()).unwrap();
            assert!(vals[0] > -1e-10);
        }
    }

    #[test]
    fn evolve_flags_invalid_tensor() {
        let mut bad = DecoherenceTensor::ones(1.0);
        bad.entries[0][3] = C64::new(3.0, 0.0);
        bad.entries[3][0] = C64::new(3.0, 0.0);
        assert!(matches!(evolve(&initial_plus_plus(), &bad), Err(Error::Consistency(_))));
    }

    #[test]
    fn overlap_examples() {
        let (c, cp) = setup(16, 1.0, 1.0, 0.05, 0.05);
        assert_eq!(ground_state_overlap(&c, &cp, BranchIndex::B11, BranchIndex::B11), 1.0);
        assert_eq!(ground_state_overlap(&c, &cp, BranchIndex::B01, BranchIndex::B10), 1.0);
        let near = ground_state_overlap(&c, &cp, BranchIndex::B11, BranchIndex::B00);
        let (c2, _) = setup(16, 1.0, 2.0, 0.05, 0.05);
        let far = ground_state_overlap(&c2, &cp, BranchIndex::B11, BranchIndex::B00);
        assert!(near < far, "{near} vs {far}");
        let spec = BranchSpectra::new(&c, &cp);
        assert_eq!(spec.overlap(BranchIndex::B11, BranchIndex::B00), near);
    }

    #[test]
    fn local_evolution_only_rotates_phases() {
        let cp = CouplingParams::with_splittings(0.05, 0.05, 1.3, -0.4).unwrap();
        let rho = initial_plus_plus().with_local_evolution(&cp, 2.0);
        for r in 0..4 {
            assert!((rho.get(r, r) - C64::new(0.25, 0.0)).norm() < 1e-15);
            for col in 0..4 {
                assert!((rho.get(r, col).norm() - 0.25).abs() < 1e-15);
            }
        }
        assert!(DensityMatrix4::new(*rho.matrix()).is_ok());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tensor_invariants(
            n_idx in 0usize..3,
            lambda in -2.0f64..2.0,
            gamma in 0.0f64..1.0,
            g in 0.0f64..0.1,
            h in 0.0f64..0.1,
            t in 0.0f64..10.0,
        ) {
            let n = [8, 16, 64][n_idx];
            let (c, cp) = setup(n, gamma, lambda, g, h);
            let tensor = gamma_tensor(&c, &cp, t);
            for a in BranchIndex::ALL {
                prop_assert_eq!(tensor.get(a, a), ONE);
                for b in BranchIndex::ALL {
                    let z = tensor.get(a, b);
                    prop_assert!(z.norm() <= 1.0 + 1e-12);
                    prop_assert!((z - tensor.get(b, a).conj()).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn swapping_couplings_relabels_branches(
            lambda in -2.0f64..2.0,
            gamma in 0.05f64..1.0,
            g in 0.0f64..0.1,
            h in 0.0f64..0.1,
            t in 0.0f64..6.0,
        ) {
            let (c, cp) = setup(32, gamma, lambda, g, h);
            let direct = gamma_tensor(&c, &cp, t);
            let mirrored = gamma_tensor(&c, &cp.swapped(), t);
            for a in BranchIndex::ALL {
                for b in BranchIndex::ALL {
                    prop_assert!((direct.get(a, b) - mirrored.get(a.swapped(), b.swapped())).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn overlap_bounded(lambda in -2.0f64..2.0, gamma in -1.0f64..1.0, g in -0.1f64..0.1, h in -0.1f64..0.1) {
            let (c, cp) = setup(24, gamma, lambda, g, h);
            for a in BranchIndex::ALL {
                for b in BranchIndex::ALL {
                    let o = ground_state_overlap(&c, &cp, a, b);
                    prop_assert!((-1.0..=1.0).contains(&o));
                }
            }
        }
    }
}
