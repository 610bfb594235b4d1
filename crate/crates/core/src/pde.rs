//! Finite-difference simulator for the reaction-diffusion dynamics
//! dp/dt = sigma Lap(p) + f(p) in one and two dimensions.
//!
//! Diffusion is treated implicitly (backward Euler; dimension-factored
//! solves in 2D) and the reaction explicitly. With the time step capped at
//! 1/max|f'| both half-steps are monotone maps that fix the constant states
//! 0 and theta_plus, so the scheme preserves nodewise ordering and the
//! invariant region [0, theta_plus]. Zero-flux boundaries stand in for the
//! whole space; callers should keep the box several bubble radii wider than
//! the support of the initial data.

use serde::Serialize;

use crate::bubble;
use crate::error::{Error, Result};
use crate::reaction::ReactionCurve;
use crate::release::ReleaseProfile;

/// Uniform square grid with zero-flux boundaries.
#[derive(Debug, Clone, Serialize)]
pub struct SimGrid {
    dim: usize,
    half_width: f64,
    nodes: usize,
    dx: f64,
}

impl SimGrid {
    pub fn new(dim: usize, half_width: f64, nodes: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::DomainError(format!(
                "grids are 1- or 2-dimensional, got {dim}"
            )));
        }
        if !(half_width > 0.0) {
            return Err(Error::InvalidBox(format!(
                "half-width must be positive, got {half_width}"
            )));
        }
        if nodes < 16 {
            return Err(Error::GridTooCoarse {
                need: 16,
                got: nodes,
            });
        }
        Ok(SimGrid {
            dim,
            half_width,
            nodes,
            dx: 2.0 * half_width / (nodes - 1) as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Total unknowns: nodes in 1D, nodes^2 in 2D.
    pub fn n_total(&self) -> usize {
        if self.dim == 1 {
            self.nodes
        } else {
            self.nodes * self.nodes
        }
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx
    }
}

/// Initial data for a simulation.
#[derive(Debug, Clone)]
pub enum Initial {
    /// The stationary profile at level alpha (radially in 2D).
    Bubble { alpha: f64 },
    /// Release plumes over a wild background of density n0.
    Release {
        profile: ReleaseProfile,
        background: f64,
    },
    Constant(f64),
    /// A full field, one value per node.
    Values(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Invasion,
    Extinction,
    Undecided,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Invasion => "invasion",
            Classification::Extinction => "extinction",
            Classification::Undecided => "undecided",
        })
    }
}

/// Frequencies must clear theta_plus minus this on the central window for
/// invasion, or fall below it everywhere for extinction.
pub const DECISION_TOL: f64 = 1e-3;

/// Fraction of clipped initial nodes above which the state is flagged.
const CLIP_WARN_FRACTION: f64 = 1e-3;

/// Nodes may overshoot the invariant region by at most this much per step
/// before the step is declared unstable.
const OVERSHOOT_GUARD: f64 = 1e-12;

/// A running simulation; owns its reaction curve and solver factorization.
#[derive(Debug, Clone)]
pub struct SimState {
    curve: ReactionCurve,
    grid: SimGrid,
    p: Vec<f64>,
    t: f64,
    sigma: f64,
    dt: f64,
    steps: u64,
    clipped: usize,
    // Thomas factorization of (I - sigma dt Lap_1d) with flux boundary rows
    inv_denom: Vec<f64>,
    cpos: Vec<f64>,
    scratch: Vec<f64>,
}

/// Default step: splitting stays accurate and the reaction map monotone.
pub fn default_dt(curve: &ReactionCurve, grid: &SimGrid, sigma: f64) -> f64 {
    (0.5 / curve.max_abs_f_prime()).min(grid.dx() * grid.dx() / (4.0 * sigma))
}

/// Samples the initial data on the grid, clipping into [0, theta_plus].
pub fn init_state(
    grid: SimGrid,
    initial: &Initial,
    curve: &ReactionCurve,
    sigma: f64,
    dt: f64,
) -> Result<SimState> {
    if !(sigma > 0.0) {
        return Err(Error::DomainError(format!(
            "diffusivity must be positive, got {sigma}"
        )));
    }
    let bound = 1.0 / curve.max_abs_f_prime();
    if !(dt > 0.0) || dt > bound {
        return Err(Error::UnstableStep { dt, bound });
    }
    let n = grid.nodes;
    let total = grid.n_total();
    let mut p = vec![0.0; total];
    match initial {
        Initial::Bubble { alpha } => {
            let profile = bubble::bubble_profile(curve, *alpha, sigma, 4096)?;
            match grid.dim {
                1 => {
                    for (i, pi) in p.iter_mut().enumerate() {
                        *pi = profile.eval(grid.coord(i));
                    }
                }
                _ => {
                    for j in 0..n {
                        let y = grid.coord(j);
                        for i in 0..n {
                            let x = grid.coord(i);
                            p[j * n + i] = profile.eval((x * x + y * y).sqrt());
                        }
                    }
                }
            }
        }
        Initial::Release {
            profile,
            background,
        } => {
            if profile.dim != grid.dim {
                return Err(Error::DomainError(format!(
                    "release profile is {}-dimensional on a {}-dimensional grid",
                    profile.dim, grid.dim
                )));
            }
            match grid.dim {
                1 => {
                    for (i, pi) in p.iter_mut().enumerate() {
                        *pi = profile.frequency_with_background(&[grid.coord(i)], *background);
                    }
                }
                _ => {
                    for j in 0..n {
                        let y = grid.coord(j);
                        for i in 0..n {
                            p[j * n + i] =
                                profile.frequency_with_background(&[grid.coord(i), y], *background);
                        }
                    }
                }
            }
        }
        Initial::Constant(c) => p.iter_mut().for_each(|v| *v = *c),
        Initial::Values(vals) => {
            if vals.len() != total {
                return Err(Error::DomainError(format!(
                    "initial field has {} values for {} nodes",
                    vals.len(),
                    total
                )));
            }
            p.copy_from_slice(vals);
        }
    }
    let theta_plus = curve.theta_plus();
    let mut clipped = 0;
    for v in &mut p {
        if *v < 0.0 || *v > theta_plus {
            clipped += 1;
            *v = v.clamp(0.0, theta_plus);
        }
    }
    // factor the 1D implicit-diffusion operator once; rows are
    // (1+a, -a), (-a, 1+2a, -a), ..., (-a, 1+a) with a = sigma dt / dx^2
    let a = sigma * dt / (grid.dx * grid.dx);
    let mut inv_denom = vec![0.0; n];
    let mut cpos = vec![0.0; n];
    inv_denom[0] = 1.0 / (1.0 + a);
    cpos[0] = a * inv_denom[0];
    for i in 1..n {
        let b = if i + 1 == n { 1.0 + a } else { 1.0 + 2.0 * a };
        let denom = b - a * cpos[i - 1];
        inv_denom[i] = 1.0 / denom;
        cpos[i] = a * inv_denom[i];
    }
    let scratch = vec![0.0; n];
    Ok(SimState {
        curve: curve.clone(),
        grid,
        p,
        t: 0.0,
        sigma,
        dt,
        steps: 0,
        clipped,
        inv_denom,
        cpos,
        scratch,
    })
}

impl SimState {
    pub fn grid(&self) -> &SimGrid {
        &self.grid
    }

    pub fn curve(&self) -> &ReactionCurve {
        &self.curve
    }

    pub fn field(&self) -> &[f64] {
        &self.p
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Nodes clipped into [0, theta_plus] when the state was initialized.
    pub fn clipped(&self) -> usize {
        self.clipped
    }

    pub fn clip_warning(&self) -> bool {
        self.clipped as f64 > CLIP_WARN_FRACTION * self.grid.n_total() as f64
    }

    pub fn center_value(&self) -> f64 {
        let mid = (self.grid.nodes - 1) / 2;
        match self.grid.dim {
            1 => self.p[mid],
            _ => self.p[mid * self.grid.nodes + mid],
        }
    }

    /// Discrete energy of the current field.
    pub fn energy(&self) -> Result<f64> {
        match self.grid.dim {
            1 => bubble::energy_1d(&self.curve, &self.p, self.grid.dx, self.sigma),
            _ => bubble::energy_2d(
                &self.curve,
                &self.p,
                self.grid.nodes,
                self.grid.nodes,
                self.grid.dx,
                self.sigma,
            ),
        }
    }

    fn solve_tridiag(&self, row: &mut [f64]) {
        let n = row.len();
        let a = self.sigma * self.dt / (self.grid.dx * self.grid.dx);
        row[0] *= self.inv_denom[0];
        for i in 1..n {
            row[i] = (row[i] + a * row[i - 1]) * self.inv_denom[i];
        }
        for i in (0..n - 1).rev() {
            row[i] += self.cpos[i] * row[i + 1];
        }
    }

    /// One time step: explicit reaction then implicit diffusion. Errors if
    /// any node leaves the invariant region beyond roundoff.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.dt;
        for v in &mut self.p {
            *v += dt * self.curve.f_raw(*v);
        }
        let n = self.grid.nodes;
        match self.grid.dim {
            1 => self.solve_tridiag_whole(),
            _ => {
                for j in 0..n {
                    let row_start = j * n;
                    let mut row = std::mem::take(&mut self.scratch);
                    row.copy_from_slice(&self.p[row_start..row_start + n]);
                    self.solve_tridiag(&mut row);
                    self.p[row_start..row_start + n].copy_from_slice(&row);
                    self.scratch = row;
                }
                for i in 0..n {
                    let mut col = std::mem::take(&mut self.scratch);
                    for j in 0..n {
                        col[j] = self.p[j * n + i];
                    }
                    self.solve_tridiag(&mut col);
                    for j in 0..n {
                        self.p[j * n + i] = col[j];
                    }
                    self.scratch = col;
                }
            }
        }
        let theta_plus = self.curve.theta_plus();
        for v in &mut self.p {
            if *v < -OVERSHOOT_GUARD || *v > theta_plus + OVERSHOOT_GUARD {
                return Err(Error::UnstableStep {
                    dt,
                    bound: 1.0 / self.curve.max_abs_f_prime(),
                });
            }
            *v = v.clamp(0.0, theta_plus);
        }
        self.t += dt;
        self.steps += 1;
        Ok(())
    }

    fn solve_tridiag_whole(&mut self) {
        let mut p = std::mem::take(&mut self.p);
        self.solve_tridiag(&mut p);
        self.p = p;
    }

    /// Minimum over the central window [-L/4, L/4]^d and global maximum.
    fn decision_stats(&self) -> (f64, f64) {
        let n = self.grid.nodes;
        let quarter = self.grid.half_width / 4.0 + 1e-9 * self.grid.dx;
        let in_window = |i: usize| self.grid.coord(i).abs() <= quarter;
        let mut window_min = f64::INFINITY;
        let mut global_max = f64::NEG_INFINITY;
        match self.grid.dim {
            1 => {
                for (i, &v) in self.p.iter().enumerate() {
                    global_max = global_max.max(v);
                    if in_window(i) {
                        window_min = window_min.min(v);
                    }
                }
            }
            _ => {
                for j in 0..n {
                    let row_in = in_window(j);
                    for i in 0..n {
                        let v = self.p[j * n + i];
                        global_max = global_max.max(v);
                        if row_in && in_window(i) {
                            window_min = window_min.min(v);
                        }
                    }
                }
            }
        }
        (window_min, global_max)
    }

    pub fn classify(&self) -> Classification {
        let (window_min, global_max) = self.decision_stats();
        if window_min >= self.curve.theta_plus() - DECISION_TOL {
            Classification::Invasion
        } else if global_max <= DECISION_TOL {
            Classification::Extinction
        } else {
            Classification::Undecided
        }
    }
}

/// Trajectory summary from `simulate`.
#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    pub outcome: Classification,
    /// First time either decision threshold was met.
    pub decided_at: Option<f64>,
    /// Center value at the end of the run.
    pub center: f64,
    pub energy: Vec<(f64, f64)>,
    #[serde(skip)]
    pub snapshots: Vec<(f64, Vec<f64>)>,
}

/// Steps to the horizon, recording snapshots at the requested times and the
/// energy every `energy_stride` steps. With `stop_on_decision` the run ends
/// as soon as either threshold is met.
pub fn simulate(
    state: &mut SimState,
    horizon: f64,
    snapshot_times: &[f64],
    energy_stride: usize,
    stop_on_decision: bool,
) -> Result<SimResult> {
    if !(horizon > 0.0) {
        return Err(Error::DomainError(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let stride = energy_stride.max(1) as u64;
    let mut wanted: Vec<f64> = snapshot_times.to_vec();
    wanted.sort_by(f64::total_cmp);
    let mut next_snap = 0;
    let mut snapshots = Vec::new();
    let mut energy = vec![(state.t, state.energy()?)];
    let mut decided_at = None;
    let mut outcome = Classification::Undecided;

    loop {
        while next_snap < wanted.len() && state.t >= wanted[next_snap] - 0.5 * state.dt {
            snapshots.push((state.t, state.p.clone()));
            next_snap += 1;
        }
        if decided_at.is_none() {
            let class = state.classify();
            if class != Classification::Undecided {
                decided_at = Some(state.t);
                outcome = class;
                if stop_on_decision {
                    break;
                }
            }
        }
        if state.t >= horizon - 0.5 * state.dt {
            break;
        }
        state.step()?;
        if state.steps % stride == 0 {
            energy.push((state.t, state.energy()?));
        }
    }
    if energy.last().map(|e| e.0) != Some(state.t) {
        energy.push((state.t, state.energy()?));
    }
    Ok(SimResult {
        outcome,
        decided_at,
        center: state.center_value(),
        energy,
        snapshots,
    })
}

/// Energies of stored snapshots, via the discrete energy functional.
pub fn energy_trace(
    curve: &ReactionCurve,
    grid: &SimGrid,
    snapshots: &[(f64, Vec<f64>)],
    sigma: f64,
) -> Result<Vec<(f64, f64)>> {
    snapshots
        .iter()
        .map(|(t, field)| {
            let e = match grid.dim {
                1 => bubble::energy_1d(curve, field, grid.dx, sigma)?,
                _ => bubble::energy_2d(curve, field, grid.nodes, grid.nodes, grid.dx, sigma)?,
            };
            Ok((*t, e))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reaction::ReactionParams;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn wmel() -> ReactionCurve {
        ReactionCurve::new(ReactionParams::default()).unwrap()
    }

    /// Box sized generously around the level-alpha bubble.
    fn bubble_box(curve: &ReactionCurve, alpha: f64, sigma: f64, factor: f64) -> f64 {
        factor * bubble::bubble_radius_1d(curve, alpha, sigma).unwrap()
    }

    #[test]
    fn zero_field_stays_zero() {
        let curve = wmel();
        let grid = SimGrid::new(1, 10.0, 33).unwrap();
        let mut state = init_state(grid, &Initial::Constant(0.0), &curve, 1.0, 0.1).unwrap();
        for _ in 0..20 {
            state.step().unwrap();
        }
        assert!(state.field().iter().all(|&v| v == 0.0));
        assert_eq!(state.clipped(), 0);
    }

    #[test]
    fn equilibria_are_stationary() {
        let curve = wmel();
        for &level in &[curve.theta(), curve.theta_plus()] {
            let grid = SimGrid::new(2, 5.0, 17).unwrap();
            let mut state = init_state(grid, &Initial::Constant(level), &curve, 2.0, 0.5).unwrap();
            for _ in 0..10 {
                state.step().unwrap();
            }
            for &v in state.field() {
                assert!((v - level).abs() < 1e-12, "drifted to {v} from {level}");
            }
        }
    }

    #[test]
    fn uniform_state_follows_the_scalar_flow() {
        let curve = wmel();
        let grid = SimGrid::new(1, 10.0, 65).unwrap();
        let c0 = 0.5 * (curve.theta() + curve.theta_plus());
        let dt = 0.01;
        let mut state = init_state(grid, &Initial::Constant(c0), &curve, 830.0, dt).unwrap();
        while state.t() < 10.0 - 1e-9 {
            state.step().unwrap();
        }
        let spread = state
            .field()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        assert!(spread.1 - spread.0 < 1e-12, "uniformity lost: {spread:?}");
        // RK4 on p' = f(p) with a much finer step as the oracle
        let mut p = c0;
        let h = 1e-3f64;
        let steps = (10.0 / h).round() as usize;
        for _ in 0..steps {
            let k1 = curve.f(p).unwrap();
            let k2 = curve.f(p + 0.5 * h * k1).unwrap();
            let k3 = curve.f(p + 0.5 * h * k2).unwrap();
            let k4 = curve.f(p + h * k3).unwrap();
            p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        let got = state.center_value();
        assert!(
            (got - p).abs() <= 1e-4 * p,
            "pde {got} vs ode {p} after 10 days"
        );
        assert!(got > c0, "interior state should move up toward theta_plus");
    }

    #[test]
    fn bubble_above_threshold_invades() {
        let curve = wmel();
        let sigma = 830.0;
        let hw = bubble_box(&curve, 0.6, sigma, 5.0);
        let grid = SimGrid::new(1, hw, 513).unwrap();
        let dt = default_dt(&curve, &grid, sigma);
        let mut state =
            init_state(grid, &Initial::Bubble { alpha: 0.6 }, &curve, sigma, dt).unwrap();
        let result = simulate(&mut state, 600.0, &[], 64, true).unwrap();
        assert_eq!(result.outcome, Classification::Invasion);
        assert!(result.decided_at.is_some());
        assert!(result.center > curve.theta_plus() - 2.0 * DECISION_TOL);
    }

    #[test]
    fn uniform_state_below_threshold_dies() {
        let curve = wmel();
        let sigma = 830.0;
        let grid = SimGrid::new(1, 500.0, 65).unwrap();
        let dt = default_dt(&curve, &grid, sigma);
        let mut state = init_state(
            grid,
            &Initial::Constant(0.9 * curve.theta()),
            &curve,
            sigma,
            dt,
        )
        .unwrap();
        let result = simulate(&mut state, 2000.0, &[], 64, true).unwrap();
        assert_eq!(result.outcome, Classification::Extinction);
    }

    #[test]
    fn energy_never_increases_along_the_flow() {
        let curve = wmel();
        let sigma = 1.0;
        let hw = bubble_box(&curve, 0.8, sigma, 4.0);
        let grid = SimGrid::new(1, hw, 257).unwrap();
        let dt = default_dt(&curve, &grid, sigma);
        let mut state =
            init_state(grid, &Initial::Bubble { alpha: 0.8 }, &curve, sigma, dt).unwrap();
        let mut prev = state.energy().unwrap();
        for _ in 0..800 {
            state.step().unwrap();
            let e = state.energy().unwrap();
            assert!(
                e <= prev + 1e-6 * (1.0 + prev.abs()),
                "energy rose from {prev} to {e} at t = {}",
                state.t()
            );
            prev = e;
        }
    }

    #[test]
    fn ordered_states_stay_ordered() {
        let curve = wmel();
        let theta_plus = curve.theta_plus();
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for dim in [1usize, 2] {
            let grid = SimGrid::new(dim, 8.0, 33).unwrap();
            let total = grid.n_total();
            let lo: Vec<f64> = (0..total)
                .map(|_| rng.gen_range(0.0..0.7 * theta_plus))
                .collect();
            let hi: Vec<f64> = lo
                .iter()
                .map(|&v| (v + rng.gen_range(0.0..0.3 * theta_plus)).min(theta_plus))
                .collect();
            let dt = default_dt(&curve, &grid, 2.0);
            let mut a = init_state(grid.clone(), &Initial::Values(lo), &curve, 2.0, dt).unwrap();
            let mut b = init_state(grid, &Initial::Values(hi), &curve, 2.0, dt).unwrap();
            for _ in 0..50 {
                a.step().unwrap();
                b.step().unwrap();
            }
            for (x, y) in a.field().iter().zip(b.field()) {
                assert!(x <= &(y + 1e-12), "order broken: {x} > {y}");
            }
        }
    }

    #[test]
    fn fields_never_leave_the_invariant_region() {
        let curve = wmel();
        let theta_plus = curve.theta_plus();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grid = SimGrid::new(1, 12.0, 65).unwrap();
        let mut vals: Vec<f64> = (0..65).map(|_| rng.gen_range(0.0..theta_plus)).collect();
        vals[0] = 0.0;
        vals[64] = theta_plus;
        let dt = 1.0 / curve.max_abs_f_prime();
        let mut state = init_state(grid, &Initial::Values(vals), &curve, 5.0, dt).unwrap();
        for _ in 0..200 {
            state.step().unwrap();
            for &v in state.field() {
                assert!((0.0..=theta_plus).contains(&v));
            }
        }
    }

    #[test]
    fn center_value_is_grid_converged() {
        let curve = wmel();
        let sigma = 1.0;
        let hw = bubble_box(&curve, 0.6, sigma, 5.0);
        let mut centers = Vec::new();
        for &nodes in &[257usize, 513] {
            let grid = SimGrid::new(1, hw, nodes).unwrap();
            let dt = default_dt(&curve, &grid, sigma);
            let mut state =
                init_state(grid, &Initial::Bubble { alpha: 0.6 }, &curve, sigma, dt).unwrap();
            while state.t() < 50.0 - 1e-9 {
                state.step().unwrap();
            }
            centers.push(state.center_value());
        }
        assert!(
            (centers[0] - centers[1]).abs() < 1e-2,
            "coarse {} vs fine {}",
            centers[0],
            centers[1]
        );
    }

    #[test]
    fn negative_energy_forces_invasion() {
        let curve = wmel();
        let sigma = 1.0;
        let r = bubble::bubble_radius_1d(&curve, 0.8, sigma).unwrap();
        let grid = SimGrid::new(1, 6.0 * r, 513).unwrap();
        // wide plateau near theta_plus with a gentle ramp: the bulk -F term
        // outweighs the interface cost and the energy starts negative
        let vals: Vec<f64> = (0..513)
            .map(|i| {
                let x = grid.coord(i).abs();
                if x <= 3.0 * r {
                    0.95
                } else if x <= 4.0 * r {
                    0.95 * (4.0 - x / r)
                } else {
                    0.0
                }
            })
            .collect();
        let dt = default_dt(&curve, &grid, sigma);
        let mut state = init_state(grid, &Initial::Values(vals), &curve, sigma, dt).unwrap();
        assert!(state.energy().unwrap() < 0.0);
        let result = simulate(&mut state, 800.0, &[], 32, true).unwrap();
        assert_eq!(result.outcome, Classification::Invasion);
        // the energy trace stayed negative from the start
        assert!(result.energy.iter().all(|&(_, e)| e < 0.0));
    }

    #[test]
    fn release_field_peaks_at_its_center() {
        let curve = wmel();
        let profile = ReleaseProfile {
            dim: 1,
            half_width: 5.0,
            per_site_mass: 0.3,
            centers: vec![[0.0, 0.0]],
            variances: vec![1.0],
            background: 1e-2,
        };
        let grid = SimGrid::new(1, 20.0, 129).unwrap();
        let state = init_state(
            grid,
            &Initial::Release {
                profile,
                background: 1e-2,
            },
            &curve,
            1.0,
            0.01,
        )
        .unwrap();
        let center = state.center_value();
        assert!(center > 0.5, "peak frequency {center}");
        assert!(state.field().iter().all(|&v| v <= center + 1e-12));
        assert_eq!(state.clipped(), 0);
    }

    #[test]
    fn out_of_range_initial_data_is_clipped_and_flagged() {
        let curve = wmel();
        let grid = SimGrid::new(1, 5.0, 33).unwrap();
        let vals = vec![1.2; 33];
        let state = init_state(grid, &Initial::Values(vals), &curve, 1.0, 0.01).unwrap();
        assert_eq!(state.clipped(), 33);
        assert!(state.clip_warning());
        assert!(state
            .field()
            .iter()
            .all(|&v| (v - curve.theta_plus()).abs() < 1e-15));
    }

    #[test]
    fn oversized_steps_are_rejected() {
        let curve = wmel();
        let grid = SimGrid::new(1, 5.0, 33).unwrap();
        let too_big = 1.01 / curve.max_abs_f_prime();
        assert!(matches!(
            init_state(grid.clone(), &Initial::Constant(0.1), &curve, 1.0, too_big),
            Err(Error::UnstableStep { .. })
        ));
        assert!(matches!(
            init_state(grid, &Initial::Constant(0.1), &curve, 1.0, -0.1),
            Err(Error::UnstableStep { .. })
        ));
        assert!(matches!(
            SimGrid::new(1, 5.0, 8),
            Err(Error::GridTooCoarse { .. })
        ));
        assert!(matches!(
            SimGrid::new(3, 5.0, 33),
            Err(Error::DomainError(_))
        ));
    }

    #[test]
    fn snapshots_and_energy_traces_line_up() {
        let curve = wmel();
        let sigma = 1.0;
        let hw = bubble_box(&curve, 0.7, sigma, 4.0);
        let grid = SimGrid::new(1, hw, 129).unwrap();
        let dt = default_dt(&curve, &grid, sigma);
        let mut state =
            init_state(grid.clone(), &Initial::Bubble { alpha: 0.7 }, &curve, sigma, dt).unwrap();
        let times = [0.0, 1.0, 2.5];
        let result = simulate(&mut state, 5.0, &times, 8, false).unwrap();
        assert_eq!(result.snapshots.len(), times.len());
        for (want, (got, _)) in times.iter().zip(&result.snapshots) {
            assert!((want - got).abs() <= dt, "snapshot at {got}, wanted {want}");
        }
        let trace = energy_trace(&curve, &grid, &result.snapshots, sigma).unwrap();
        assert_eq!(trace.len(), times.len());
        let mut prev = f64::INFINITY;
        for (_, e) in trace {
            assert!(e.is_finite() && e <= prev + 1e-9);
            prev = e;
        }
    }

    #[test]
    fn two_dimensional_disk_release_invades_or_dies_by_size() {
        let curve = wmel();
        let sigma = 1.0;
        let r = bubble::bubble_radius_1d(&curve, 0.8, sigma).unwrap();
        let grid = SimGrid::new(2, 4.0 * r, 65).unwrap();
        let dt = default_dt(&curve, &grid, sigma);
        let mut outcomes = Vec::new();
        for &disk in &[2.2 * r, 0.25 * r] {
            let n = grid.nodes();
            let vals: Vec<f64> = (0..n * n)
                .map(|idx| {
                    let (i, j) = (idx % n, idx / n);
                    let (x, y) = (grid.coord(i), grid.coord(j));
                    if (x * x + y * y).sqrt() <= disk {
                        0.9
                    } else {
                        0.0
                    }
                })
                .collect();
            let mut state =
                init_state(grid.clone(), &Initial::Values(vals), &curve, sigma, dt).unwrap();
            let result = simulate(&mut state, 1500.0, &[], 128, true).unwrap();
            outcomes.push(result.outcome);
        }
        assert_eq!(outcomes[0], Classification::Invasion, "large disk");
        assert_eq!(outcomes[1], Classification::Extinction, "small disk");
    }
}
