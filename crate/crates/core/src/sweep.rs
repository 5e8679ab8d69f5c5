//! Parameter grids over `(λ, γ, t)` and critical-feature extraction.
//!
//! A sweep evaluates the probe concurrence at every grid point. Points sharing
//! `(λ, γ)` share one [`BranchSpectra`], so the chain spectra are built once
//! per chain and the time axis only costs the tensor products. Rows come back
//! ordered by `(λ, γ, t)` grid index whatever the worker count.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::decoherence::{evolve, BranchSpectra, DensityMatrix4};
use crate::entanglement::concurrence;
use crate::spectrum::{BranchIndex, ChainParams, CouplingParams};
use crate::{Error, Result, C64};

/// Tolerance on `|Γ| ≤ 1` for emitted rows.
pub const MODULUS_TOL: f64 = 1e-12;

/// Minimum number of points along the scanned axis for [`detect_critical`].
pub const MIN_CUT_POINTS: usize = 5;

/// One sweep axis: pinned to a value or sampled on an inclusive uniform grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AxisRange {
    Fixed(f64),
    Grid { min: f64, max: f64, points: usize },
}

impl AxisRange {
    pub fn is_varying(&self) -> bool {
        matches!(self, AxisRange::Grid { .. })
    }

    pub fn len(&self) -> usize {
        match *self {
            AxisRange::Fixed(_) => 1,
            AxisRange::Grid { points, .. } => points,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid values; both endpoints are hit exactly.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            AxisRange::Fixed(v) => vec![v],
            AxisRange::Grid { min, max, points } => {
                let last = points.saturating_sub(1).max(1) as f64;
                (0..points).map(|i| if i + 1 == points { max } else { min + (max - min) * (i as f64 / last) }).collect()
            }
        }
    }

    pub fn validate(&self, axis: &'static str) -> Result<()> {
        match *self {
            AxisRange::Fixed(v) if !v.is_finite() => {
                Err(Error::InvalidGrid { axis, reason: format!("value {v} is not finite") })
            }
            AxisRange::Fixed(_) => Ok(()),
            AxisRange::Grid { min, max, points } => {
                if !min.is_finite() || !max.is_finite() {
                    return Err(Error::InvalidGrid { axis, reason: "bounds must be finite".into() });
                }
                if !(min < max) {
                    return Err(Error::InvalidGrid { axis, reason: format!("need min < max, got {min}:{max}") });
                }
                if points < 2 {
                    return Err(Error::InvalidGrid { axis, reason: format!("need at least 2 points, got {points}") });
                }
                let v = self.values();
                if v.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(Error::InvalidGrid { axis, reason: "grid is not strictly increasing".into() });
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for AxisRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisRange::Fixed(v) => write!(f, "{v}"),
            AxisRange::Grid { min, max, points } => write!(f, "{min}:{max}:{points}"),
        }
    }
}

/// `"0.5"` or `"min:max:points"`.
impl FromStr for AxisRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let num = |p: &str| p.parse::<f64>().map_err(|_| format!("`{p}` is not a number"));
        match parts.as_slice() {
            [v] => Ok(AxisRange::Fixed(num(v)?)),
            [a, b, n] => {
                let points = n.parse::<usize>().map_err(|_| format!("`{n}` is not a point count"))?;
                Ok(AxisRange::Grid { min: num(a)?, max: num(b)?, points })
            }
            _ => Err(format!("expected a number or min:max:points, got `{s}`")),
        }
    }
}

/// Initial probe state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InitialState {
    #[default]
    PlusPlus,
    /// `(|00⟩ + |11⟩)/√2`
    PhiPlus,
    /// `(|01⟩ + |10⟩)/√2`
    PsiPlus,
}

impl InitialState {
    pub fn density(&self) -> DensityMatrix4 {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let z = C64::new(0.0, 0.0);
        let psi = match self {
            InitialState::PlusPlus => return DensityMatrix4::plus_plus(),
            InitialState::PhiPlus => [s, z, z, s],
            InitialState::PsiPlus => [z, s, s, z],
        };
        DensityMatrix4::from_pure(psi).expect("Bell states are valid")
    }
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "plus_plus" | "++" => Ok(InitialState::PlusPlus),
            "phi_plus" => Ok(InitialState::PhiPlus),
            "psi_plus" => Ok(InitialState::PsiPlus),
            other => Err(format!("unknown initial state `{other}` (expected plus_plus, phi_plus or psi_plus)")),
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitialState::PlusPlus => "plus_plus",
            InitialState::PhiPlus => "phi_plus",
            InitialState::PsiPlus => "psi_plus",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub n_sites: usize,
    pub lambda: AxisRange,
    pub gamma: AxisRange,
    pub time: AxisRange,
    pub coupling: CouplingParams,
    pub initial: InitialState,
    /// Also record the smallest and largest branch ground-state overlap.
    pub with_overlap: bool,
}

impl SweepSpec {
    /// At most two axes vary; every grid is valid and every chain is constructible.
    pub fn validate(&self) -> Result<()> {
        self.lambda.validate("lambda")?;
        self.gamma.validate("gamma")?;
        self.time.validate("t")?;
        let varying = [self.lambda, self.gamma, self.time].iter().filter(|a| a.is_varying()).count();
        if varying > 2 {
            return Err(Error::InvalidGrid { axis: "t", reason: "at most two of lambda, gamma, t may vary".into() });
        }
        for &l in &self.lambda.values() {
            for &g in &self.gamma.values() {
                ChainParams::new(self.n_sites, g, l)?;
            }
        }
        Ok(())
    }

    pub fn point_count(&self) -> usize {
        self.lambda.len() * self.gamma.len() * self.time.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub lambda: f64,
    pub gamma: f64,
    pub t: f64,
    pub concurrence: f64,
    /// `|Γ|` of the six independent off-diagonal entries, in
    /// [`BranchIndex::OFF_DIAGONAL`] order.
    pub gamma_offdiag_abs: [f64; 6],
    /// `[min, max]` of the branch ground-state overlaps.
    pub overlap_extremes: Option<[f64; 2]>,
}

impl SweepRow {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.concurrence) {
            return Err(Error::Consistency(format!("concurrence {} outside [0, 1]", self.concurrence)));
        }
        if let Some(m) = self.gamma_offdiag_abs.iter().find(|m| !(0.0..=1.0 + MODULUS_TOL).contains(*m)) {
            return Err(Error::Consistency(format!(
                "|Gamma| = {m} outside [0, 1] at lambda={}, gamma={}, t={}",
                self.lambda, self.gamma, self.t
            )));
        }
        Ok(())
    }
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// [`run_sweep_parallel`] with one worker per available core.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    run_sweep_parallel(spec, default_workers())
}

pub fn run_sweep_parallel(spec: &SweepSpec, workers: usize) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    if workers == 0 {
        return Err(Error::param("workers", "must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))?;

    let chains: Vec<(f64, f64)> =
        spec.lambda.values().into_iter().flat_map(|l| spec.gamma.values().into_iter().map(move |g| (l, g))).collect();
    let times = spec.time.values();
    let rho0 = spec.initial.density();

    let groups: Vec<Result<Vec<SweepRow>>> = pool.install(|| {
        chains
            .par_iter()
            .map(|&(lambda, gamma)| {
                let chain = ChainParams::new(spec.n_sites, gamma, lambda)?;
                let spectra = BranchSpectra::new(&chain, &spec.coupling);
                let overlap = spec.with_overlap.then(|| overlap_extremes(&spectra));
                times
                    .par_iter()
                    .map(|&t| {
                        let tensor = spectra.tensor(t);
                        let rho = evolve(&rho0, &tensor)?.with_local_evolution(&spec.coupling, t);
                        let row = SweepRow {
                            lambda,
                            gamma,
                            t,
                            concurrence: concurrence(&rho)?.concurrence,
                            gamma_offdiag_abs: tensor.offdiag_abs(),
                            overlap_extremes: overlap,
                        };
                        row.validate()?;
                        Ok(row)
                    })
                    .collect()
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(spec.point_count());
    for g in groups {
        rows.extend(g?);
    }
    Ok(rows)
}

fn overlap_extremes(spectra: &BranchSpectra) -> [f64; 2] {
    BranchIndex::OFF_DIAGONAL
        .iter()
        .map(|&(a, b)| spectra.overlap(a, b))
        .fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], o| [lo.min(o), hi.max(o)])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CriticalAxis {
    Lambda,
    Gamma,
}

impl CriticalAxis {
    fn coordinate(&self, row: &SweepRow) -> f64 {
        match self {
            CriticalAxis::Lambda => row.lambda,
            CriticalAxis::Gamma => row.gamma,
        }
    }

    /// The two coordinates held fixed along a cut.
    fn others(&self, row: &SweepRow) -> [f64; 2] {
        match self {
            CriticalAxis::Lambda => [row.gamma, row.t],
            CriticalAxis::Gamma => [row.lambda, row.t],
        }
    }
}

impl FromStr for CriticalAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "lambda" => Ok(CriticalAxis::Lambda),
            "gamma" => Ok(CriticalAxis::Gamma),
            other => Err(format!("unknown axis `{other}` (expected lambda or gamma)")),
        }
    }
}

impl fmt::Display for CriticalAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriticalAxis::Lambda => "lambda",
            CriticalAxis::Gamma => "gamma",
        })
    }
}

/// Features along one cut through the data.
#[derive(Clone, Debug, PartialEq)]
pub struct CutReport {
    /// Values of the two other coordinates (`[γ, t]` or `[λ, t]`).
    pub fixed: [f64; 2],
    pub peaks: Vec<f64>,
    pub gradient_maxima: Vec<f64>,
    /// `(midpoint, |ΔC/Δx|)` for each neighbouring pair of samples.
    pub gradient: Vec<(f64, f64)>,
    pub max_concurrence: f64,
}

impl CutReport {
    /// Midpoint of the steepest step whose midpoint lies in `[lo, hi]`.
    pub fn steepest_in(&self, lo: f64, hi: f64) -> Option<f64> {
        self.gradient
            .iter()
            .filter(|(x, _)| (lo..=hi).contains(x))
            .fold(None, |best: Option<(f64, f64)>, &(x, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((x, d)),
            })
            .map(|(x, _)| x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriticalReport {
    pub axis: CriticalAxis,
    /// Union over cuts, deduplicated within one grid step.
    pub peak_locations: Vec<f64>,
    pub gradient_max_locations: Vec<f64>,
    pub cuts: Vec<CutReport>,
}

/// Local maxima of concurrence and of `|ΔC/Δx|` along `axis`.
///
/// Rows are grouped into cuts by the remaining two coordinates. Interior local
/// maxima are refined with a parabola through the three bracketing samples;
/// a plateau reports its leftmost point unrefined. Endpoint maxima are not
/// features and are skipped.
pub fn detect_critical(rows: &[SweepRow], axis: CriticalAxis) -> Result<CriticalReport> {
    let mut sorted: Vec<&SweepRow> = rows.iter().collect();
    sorted.sort_by(|a, b| {
        let (oa, ob) = (axis.others(a), axis.others(b));
        oa[0].total_cmp(&ob[0]).then(oa[1].total_cmp(&ob[1])).then(axis.coordinate(a).total_cmp(&axis.coordinate(b)))
    });
    if sorted.is_empty() {
        return Err(Error::TooFewPoints { got: 0, need: MIN_CUT_POINTS });
    }

    let mut cuts = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || axis.others(sorted[i]) != axis.others(sorted[start]) {
            cuts.push(analyse_cut(&sorted[start..i], axis)?);
            start = i;
        }
    }

    let min_step = cuts.iter().map(|c| c.step).fold(f64::INFINITY, f64::min);
    let merge = |pick: fn(&CutAnalysis) -> &Vec<f64>| {
        let mut all: Vec<f64> = cuts.iter().flat_map(|c| pick(c).iter().copied()).collect();
        all.sort_by(f64::total_cmp);
        dedup_within(all, min_step)
    };
    let peak_locations = merge(|c| &c.report.peaks);
    let gradient_max_locations = merge(|c| &c.report.gradient_maxima);
    Ok(CriticalReport {
        axis,
        peak_locations,
        gradient_max_locations,
        cuts: cuts.into_iter().map(|c| c.report).collect(),
    })
}

struct CutAnalysis {
    report: CutReport,
    step: f64,
}

fn analyse_cut(rows: &[&SweepRow], axis: CriticalAxis) -> Result<CutAnalysis> {
    if rows.len() < MIN_CUT_POINTS {
        return Err(Error::TooFewPoints { got: rows.len(), need: MIN_CUT_POINTS });
    }
    let x: Vec<f64> = rows.iter().map(|r| axis.coordinate(r)).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.concurrence).collect();
    if x.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidGrid { axis: axis_name(axis), reason: "repeated coordinate within a cut".into() });
    }
    let step = x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);

    let gradient: Vec<(f64, f64)> = x
        .windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| (0.5 * (xs[0] + xs[1]), ((ys[1] - ys[0]) / (xs[1] - xs[0])).abs()))
        .collect();
    let gx: Vec<f64> = gradient.iter().map(|g| g.0).collect();
    let gy: Vec<f64> = gradient.iter().map(|g| g.1).collect();

    let report = CutReport {
        fixed: axis.others(rows[0]),
        peaks: dedup_within(local_maxima(&x, &y), step),
        gradient_maxima: dedup_within(local_maxima(&gx, &gy), step),
        max_concurrence: y.iter().copied().fold(0.0, f64::max),
        gradient,
    };
    Ok(CutAnalysis { report, step })
}

fn axis_name(axis: CriticalAxis) -> &'static str {
    match axis {
        CriticalAxis::Lambda => "lambda",
        CriticalAxis::Gamma => "gamma",
    }
}

/// Interior local maxima; plateaus give their leftmost point. Differences
/// below `1e-9` of the largest `|y|` count as ties, so rounding noise on a flat
/// stretch does not produce maxima.
fn local_maxima(x: &[f64], y: &[f64]) -> Vec<f64> {
    let tol = 1e-9 * y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut out = Vec::new();
    let mut i = 1;
    while i + 1 < y.len() {
        let mut end = i;
        while end + 1 < y.len() && (y[end + 1] - y[i]).abs() <= tol {
            end += 1;
        }
        let rises = y[i - 1] < y[i] - tol;
        let falls = end + 1 < y.len() && y[end + 1] < y[i] - tol;
        if rises && falls {
            out.push(if end == i { refine(x, y, i) } else { x[i] });
        }
        i = end + 1;
    }
    out
}

/// Vertex of the parabola through samples `i-1, i, i+1`, kept inside the bracket.
fn refine(x: &[f64], y: &[f64], i: usize) -> f64 {
    let (d0, d2) = (x[i - 1] - x[i], x[i + 1] - x[i]);
    let (u0, u2) = (y[i - 1] - y[i], y[i + 1] - y[i]);
    let curvature = (u0 / d0 - u2 / d2) / (d0 - d2);
    if !(curvature < 0.0) {
        return x[i];
    }
    let slope = u0 / d0 - curvature * d0;
    (x[i] - slope / (2.0 * curvature)).clamp(x[i - 1], x[i + 1])
}

/// Drop locations closer than `step` (with a little slack) to the previous kept one.
fn dedup_within(sorted: Vec<f64>, step: f64) -> Vec<f64> {
    let tol = step * (1.0 + 1e-9);
    let mut out: Vec<f64> = Vec::with_capacity(sorted.len());
    for v in sorted {
        if out.last().is_none_or(|&last| v - last >= tol) {
            out.push(v);
        }
    }
    out
}

/// Peak locations per time and their largest pairwise disagreement.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub axis: CriticalAxis,
    pub times: Vec<f64>,
    pub peaks: Vec<Vec<f64>>,
    pub gradient_maxima: Vec<Vec<f64>>,
    /// Largest Hausdorff distance between the peak sets of any two times.
    pub max_deviation: f64,
}

/// Re-run `spec` at each time with `t` pinned and compare the peak sets.
pub fn stability_check(spec: &SweepSpec, times: &[f64], axis: CriticalAxis, workers: usize) -> Result<StabilityReport> {
    if times.len() < 2 {
        return Err(Error::TooFewPoints { got: times.len(), need: 2 });
    }
    let mut reports = Vec::with_capacity(times.len());
    for &t in times {
        let spec_t = SweepSpec { time: AxisRange::Fixed(t), ..spec.clone() };
        reports.push(detect_critical(&run_sweep_parallel(&spec_t, workers)?, axis)?);
    }
    Ok(stability_from_reports(times, &reports, axis))
}

/// Same comparison on already computed rows, one report per distinct `t`.
pub fn stability_from_rows(rows: &[SweepRow], axis: CriticalAxis) -> Result<StabilityReport> {
    let mut times: Vec<f64> = rows.iter().map(|r| r.t).collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    if times.len() < 2 {
        return Err(Error::TooFewPoints { got: times.len(), need: 2 });
    }
    let mut reports = Vec::with_capacity(times.len());
    for &t in &times {
        let at_t: Vec<SweepRow> = rows.iter().filter(|r| r.t == t).cloned().collect();
        reports.push(detect_critical(&at_t, axis)?);
    }
    Ok(stability_from_reports(&times, &reports, axis))
}

fn stability_from_reports(times: &[f64], reports: &[CriticalReport], axis: CriticalAxis) -> StabilityReport {
    let peaks: Vec<Vec<f64>> = reports.iter().map(|r| r.peak_locations.clone()).collect();
    let mut max_deviation: f64 = 0.0;
    for i in 0..peaks.len() {
        for j in i + 1..peaks.len() {
            max_deviation = max_deviation.max(hausdorff(&peaks[i], &peaks[j]));
        }
    }
    StabilityReport {
        axis,
        times: times.to_vec(),
        gradient_maxima: reports.iter().map(|r| r.gradient_max_locations.clone()).collect(),
        peaks,
        max_deviation,
    }
}

/// Hausdorff distance between two point sets on the line. Two empty sets are
/// at distance 0; an empty and a non-empty set are infinitely far apart.
pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 0.0,
        (true, false) | (false, true) => return f64::INFINITY,
        _ => {}
    }
    let directed = |p: &[f64], q: &[f64]| {
        p.iter().map(|x| q.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(xs: &[f64], f: impl Fn(f64) -> f64, t: f64) -> Vec<SweepRow> {
        xs.iter()
            .map(|&x| SweepRow {
                lambda: x,
                gamma: 1.0,
                t,
                concurrence: f(x),
                gamma_offdiag_abs: [1.0; 6],
                overlap_extremes: None,
            })
            .collect()
    }

    fn grid(min: f64, max: f64, points: usize) -> Vec<f64> {
        AxisRange::Grid { min, max, points }.values()
    }

    fn point_spec() -> SweepSpec {
        SweepSpec {
            n_sites: 8,
            lambda: AxisRange::Fixed(1.0),
            gamma: AxisRange::Fixed(1.0),
            time: AxisRange::Fixed(0.0),
            coupling: CouplingParams::new(0.05, 0.05).unwrap(),
            initial: InitialState::PlusPlus,
            with_overlap: false,
        }
    }

    #[test]
    fn axis_parsing_and_values() {
        assert_eq!("0.5".parse::<AxisRange>().unwrap(), AxisRange::Fixed(0.5));
        let g: AxisRange = "-2:2:5".parse().unwrap();
        assert_eq!(g.values(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert!("1:2".parse::<AxisRange>().is_err());
        assert!("a:2:3".parse::<AxisRange>().is_err());
        assert!(AxisRange::Grid { min: 1.0, max: 1.0, points: 3 }.validate("t").is_err());
        assert!(AxisRange::Grid { min: 0.0, max: 1.0, points: 1 }.validate("t").is_err());
        assert!(AxisRange::Fixed(f64::NAN).validate("t").is_err());
    }

    #[test]
    fn single_point_at_t0_is_separable() {
        let rows = run_sweep_parallel(&point_spec(), 1).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].concurrence, 0.0);
        assert_eq!(rows[0].gamma_offdiag_abs, [1.0; 6]);
    }

    #[test]
    fn three_varying_axes_rejected() {
        let spec = SweepSpec {
            lambda: "0:1:3".parse().unwrap(),
            gamma: "0:1:3".parse().unwrap(),
            time: "0:1:3".parse().unwrap(),
            ..point_spec()
        };
        assert!(matches!(spec.validate(), Err(Error::InvalidGrid { .. })));
        let odd = SweepSpec { n_sites: 7, ..point_spec() };
        assert!(run_sweep(&odd).is_err());
        assert!(run_sweep_parallel(&point_spec(), 0).is_err());
    }

    #[test]
    fn rows_are_ordered_and_worker_independent() {
        let spec = SweepSpec {
            n_sites: 32,
            lambda: "-1.5:1.5:7".parse().unwrap(),
            time: "0:3:6".parse().unwrap(),
            with_overlap: true,
            ..point_spec()
        };
        let a = run_sweep_parallel(&spec, 1).unwrap();
        let b = run_sweep_parallel(&spec, 4).unwrap();
        assert_eq!(a.len(), 42);
        assert_eq!(a, b);
        for w in a.windows(2) {
            assert!((w[0].lambda, w[0].t) < (w[1].lambda, w[1].t));
        }
        let [lo, hi] = a[0].overlap_extremes.unwrap();
        assert!(0.0 <= lo && lo <= hi && hi <= 1.0 + 1e-12);
    }

    #[test]
    fn bell_start_stays_entangled_at_t0() {
        let spec = SweepSpec { initial: InitialState::PhiPlus, ..point_spec() };
        let rows = run_sweep(&spec).unwrap();
        assert!((rows[0].concurrence - 1.0).abs() < 1e-12);
    }

    #[test]
    fn triangular_profile() {
        let xs = grid(0.0, 2.0, 21);
        let rows = synthetic(&xs, |x| 1.0 - (x - 1.0).abs(), 1.0);
        let r = detect_critical(&rows, CriticalAxis::Lambda).unwrap();
        assert_eq!(r.peak_locations.len(), 1);
        assert!((r.peak_locations[0] - 1.0).abs() < 1e-12);
        // constant |gradient| on each side: no interior gradient maxima
        assert!(r.gradient_max_locations.is_empty());
    }

    #[test]
    fn flat_profile_has_no_features() {
        let rows = synthetic(&grid(-1.0, 1.0, 11), |_| 0.3, 1.0);
        let r = detect_critical(&rows, CriticalAxis::Lambda).unwrap();
        assert!(r.peak_locations.is_empty());
        assert!(r.gradient_max_locations.is_empty());
    }

    #[test]
    fn plateau_reports_leftmost_point() {
        let xs = grid(0.0, 1.0, 11);
        let rows = synthetic(&xs, |x| if (0.35..0.65).contains(&x) { 1.0 } else { 0.0 }, 1.0);
        let r = detect_critical(&rows, CriticalAxis::Lambda).unwrap();
        assert_eq!(r.peak_locations, vec![xs[4]]);
    }

    #[test]
    fn quadratic_refinement_finds_off_grid_vertex() {
        let rows = synthetic(&grid(0.0, 2.0, 21), |x| -(x - 1.037) * (x - 1.037), 1.0);
        let r = detect_critical(&rows, CriticalAxis::Lambda).unwrap();
        assert!((r.peak_locations[0] - 1.037).abs() < 1e-10);
    }

    #[test]
    fn gradient_maxima_and_steepest() {
        // smooth step centred between grid points
        let rows = synthetic(&grid(-2.0, 2.0, 81), |x| 1.0 / (1.0 + (-(x - 0.51) * 8.0).exp()), 1.0);
        let r = detect_critical(&rows, CriticalAxis::Lambda).unwrap();
        assert_eq!(r.gradient_max_locations.len(), 1);
        assert!((r.gradient_max_locations[0] - 0.51).abs() < 0.005);
        let steep = r.cuts[0].steepest_in(0.0, 2.0).unwrap();
        assert!((steep - 0.525).abs() < 1e-12);
    }

    #[test]
    fn too_few_points_rejected() {
        let rows = synthetic(&grid(0.0, 1.0, 4), |x| x, 1.0);
        assert!(matches!(detect_critical(&rows, CriticalAxis::Lambda), Err(Error::TooFewPoints { got: 4, need: 5 })));
        assert!(detect_critical(&[], CriticalAxis::Gamma).is_err());
    }

    #[test]
    fn stability_of_identical_and_shifted_peaks() {
        let xs = grid(-2.0, 2.0, 201);
        let step = xs[1] - xs[0];
        let tri = |c: f64| move |x: f64| (1.0 - (x - c).abs()).max(0.0);
        let mut rows = synthetic(&xs, tri(xs[150]), 0.75);
        rows.extend(synthetic(&xs, tri(xs[150]), 1.5));
        assert_eq!(stability_from_rows(&rows, CriticalAxis::Lambda).unwrap().max_deviation, 0.0);

        let mut rows = synthetic(&xs, tri(xs[150]), 0.75);
        rows.extend(synthetic(&xs, tri(xs[151]), 1.5));
        let s = stability_from_rows(&rows, CriticalAxis::Lambda).unwrap();
        assert!((s.max_deviation - step).abs() < 1e-12);
    }

    #[test]
    fn hausdorff_edge_cases() {
        assert_eq!(hausdorff(&[], &[]), 0.0);
        assert_eq!(hausdorff(&[1.0], &[]), f64::INFINITY);
        assert_eq!(hausdorff(&[-1.0, 1.0], &[1.25]), 2.25);
    }

    #[test]
    fn stability_check_same_time_twice() {
        let spec = SweepSpec { n_sites: 16, lambda: "-2:2:21".parse().unwrap(), ..point_spec() };
        let s = stability_check(&spec, &[0.9, 0.9], CriticalAxis::Lambda, 2).unwrap();
        assert_eq!(s.max_deviation, 0.0);
        assert!(stability_check(&spec, &[0.9], CriticalAxis::Lambda, 2).is_err());
    }
}
