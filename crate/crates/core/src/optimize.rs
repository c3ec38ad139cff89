//! Derivative-free maximization over rotations.
//!
//! Rotation searches start from a coarse Z-X-Z Euler grid, then refine the best
//! grid point, a few caller-supplied seeds and some random starts with
//! Nelder–Mead. Refinement works in rotation-vector coordinates around each
//! start, `O(ω) = exp(ω)·O₀`, which has no gimbal lock. Everything is
//! sequential and seeded, so results are reproducible bit for bit.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{random_rotation, PauliDistribution};
use crate::entropy::{h_bloch, shannon_unchecked};
use crate::linalg::{
    orthonormal_pair, rotation3_from_euler, Mat3, Rotation2, Rotation3, Vec3,
};
use crate::rates::{
    bb84_accurate_from, bb84_g1_plan, six_state_accurate_from, six_state_f1_plan,
    CompensationPlan, Restriction, UnitalChannel,
};
use crate::{Error, Result};

/// Random starts refined in addition to the grid optimum and the seeds.
const RANDOM_STARTS: usize = 8;
/// Nelder–Mead restarts from its own optimum with a smaller simplex.
const POLISH_ROUNDS: usize = 4;
/// Parabolic-fit stencil for the final 1-D polish.
const PARABOLA_STEP: f64 = 1e-4;
/// Twirled weights below this indicate an invalid channel rather than rounding.
const WEIGHT_ASSERT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Grid points per Euler angle; plane searches use 16 times as many angles.
    pub coarse_grid: usize,
    /// Nelder–Mead iterations per dimension and polish round.
    pub refine_iters: usize,
    /// Value spread at which a simplex counts as converged.
    pub tol: f64,
    pub seed: u64,
    /// Random compensations drawn by [`brute_force_max`].
    pub samples: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            coarse_grid: 24,
            refine_iters: 200,
            tol: 1e-10,
            seed: 0,
            samples: 10_000,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.coarse_grid < 4 || self.coarse_grid > 512 {
            return Err(Error::InvalidConfig(format!(
                "coarse_grid = {} outside [4, 512]",
                self.coarse_grid
            )));
        }
        if self.refine_iters == 0 {
            return Err(Error::InvalidConfig("refine_iters must be positive".into()));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!("tol = {} must be positive", self.tol)));
        }
        if self.samples == 0 {
            return Err(Error::InvalidConfig("samples must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchResult<A> {
    pub value: f64,
    pub argmax: A,
    pub evaluations: usize,
}

fn finite_or_worst(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

pub(crate) struct Simplex {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Nelder–Mead maximization with standard coefficients, starting from the
/// axis-aligned simplex of size `step` at `x0`.
pub(crate) fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    max_iter: usize,
    tol: f64,
) -> Simplex {
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        finite_or_worst(f(x))
    };
    let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0, &mut evaluations);
    pts.push((x0.to_vec(), v0));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x, &mut evaluations);
        pts.push((x, v));
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(p, q)| p + t * (q - p)).collect()
    };
    for _ in 0..max_iter {
        pts.sort_by(|a, b| b.1.total_cmp(&a.1));
        let spread = pts[0].1 - pts[n].1;
        let diameter = pts[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&pts[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if spread <= tol && diameter <= tol.sqrt() {
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &pts[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = pts[n].0.clone();
        let reflected = lerp(&centroid, &worst, -1.0);
        let fr = eval(&reflected, &mut evaluations);
        if fr > pts[0].1 {
            let expanded = lerp(&centroid, &worst, -2.0);
            let fe = eval(&expanded, &mut evaluations);
            pts[n] = if fe > fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr > pts[n - 1].1 {
            pts[n] = (reflected, fr);
            continue;
        }
        let (contracted, threshold) = if fr > pts[n].1 {
            (lerp(&centroid, &reflected, 0.5), fr)
        } else {
            (lerp(&centroid, &worst, 0.5), pts[n].1)
        };
        let fc = eval(&contracted, &mut evaluations);
        if fc > threshold || (fc == threshold && fr > pts[n].1) {
            pts[n] = (contracted, fc);
            continue;
        }
        let best = pts[0].0.clone();
        for p in pts.iter_mut().skip(1) {
            p.0 = lerp(&best, &p.0, 0.5);
            p.1 = eval(&p.0, &mut evaluations);
        }
    }
    pts.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (x, value) = pts.swap_remove(0);
    Simplex {
        x,
        value,
        evaluations,
    }
}

/// Repeated Nelder–Mead, each round restarted at the previous optimum with a
/// simplex ten times smaller, until a round stops improving.
pub(crate) fn polish<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    step: f64,
    cfg: &SearchConfig,
) -> Simplex {
    let max_iter = cfg.refine_iters * x0.len().max(1);
    let mut best = nelder_mead(&mut f, x0, step, max_iter, cfg.tol);
    let mut evaluations = best.evaluations;
    let mut step = step;
    for _ in 1..POLISH_ROUNDS {
        step *= 0.1;
        let next = nelder_mead(&mut f, &best.x, step, max_iter, cfg.tol);
        evaluations += next.evaluations;
        let improved = next.value - best.value;
        if next.value > best.value {
            best = next;
        }
        if improved <= cfg.tol {
            break;
        }
    }
    best.evaluations = evaluations;
    best
}

fn local_rotation(base: &Rotation3, omega: &[f64]) -> Rotation3 {
    Rotation3::from_rotation_vector(&Vec3::new(omega[0], omega[1], omega[2])).then(base)
}

/// Maximizes `f` over SO(3).
pub fn maximize_so3<F: FnMut(&Rotation3) -> f64>(
    f: F,
    cfg: &SearchConfig,
) -> Result<SearchResult<Rotation3>> {
    maximize_so3_seeded(f, cfg, &[])
}

/// As [`maximize_so3`], additionally refining from each of `seeds`.
pub fn maximize_so3_seeded<F: FnMut(&Rotation3) -> f64>(
    mut f: F,
    cfg: &SearchConfig,
    seeds: &[Rotation3],
) -> Result<SearchResult<Rotation3>> {
    cfg.validate()?;
    let n = cfg.coarse_grid;
    let mut evaluations = 0usize;
    let mut grid_best = (f64::NEG_INFINITY, Rotation3::identity());
    for i in 0..n {
        let alpha = TAU * i as f64 / n as f64;
        for j in 0..n {
            let beta = PI * (j as f64 + 0.5) / n as f64;
            for k in 0..n {
                let gamma = TAU * k as f64 / n as f64;
                let r = rotation3_from_euler(alpha, beta, gamma);
                let v = finite_or_worst(f(&r));
                evaluations += 1;
                if v > grid_best.0 {
                    grid_best = (v, r);
                }
            }
        }
    }

    let mut starts = vec![(grid_best.1, TAU / n as f64)];
    starts.extend(seeds.iter().map(|s| (*s, 0.05)));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    starts.extend((0..RANDOM_STARTS).map(|_| (random_rotation(&mut rng), 0.5)));

    let mut best = SearchResult {
        value: grid_best.0,
        argmax: grid_best.1,
        evaluations: 0,
    };
    for (base, step) in starts {
        let s = polish(|w| f(&local_rotation(&base, w)), &[0.0; 3], step, cfg);
        evaluations += s.evaluations;
        if s.value > best.value {
            best.value = s.value;
            best.argmax = local_rotation(&base, &s.x);
        }
    }
    best.evaluations = evaluations;
    Ok(best)
}

/// Maximizes `f` over SO(2).
pub fn maximize_so2<F: FnMut(&Rotation2) -> f64>(
    f: F,
    cfg: &SearchConfig,
) -> Result<SearchResult<Rotation2>> {
    maximize_so2_seeded(f, cfg, &[])
}

/// Angle grid of `16·coarse_grid` points, golden-section search between the
/// neighbors of the best grid point and of each seed, then a parabolic polish.
pub fn maximize_so2_seeded<F: FnMut(&Rotation2) -> f64>(
    mut f: F,
    cfg: &SearchConfig,
    seeds: &[Rotation2],
) -> Result<SearchResult<Rotation2>> {
    cfg.validate()?;
    let m = cfg.coarse_grid * 16;
    let h = TAU / m as f64;
    let mut evaluations = 0usize;
    let mut g = |theta: f64, evaluations: &mut usize| {
        *evaluations += 1;
        finite_or_worst(f(&Rotation2::from_angle(theta)))
    };
    let mut grid_best = (f64::NEG_INFINITY, 0.0);
    for i in 0..m {
        let theta = h * i as f64;
        let v = g(theta, &mut evaluations);
        if v > grid_best.0 {
            grid_best = (v, theta);
        }
    }

    let mut best = (grid_best.0, grid_best.1);
    let centers: Vec<f64> = std::iter::once(grid_best.1)
        .chain(seeds.iter().map(|s| s.angle()))
        .collect();
    for center in centers {
        let (mut a, mut b) = (center - h, center + h);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let mut fc = g(c, &mut evaluations);
        let mut fd = g(d, &mut evaluations);
        while b - a > 1e-12 {
            if fc >= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = g(c, &mut evaluations);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = g(d, &mut evaluations);
            }
        }
        let mut local = if fc >= fd { (fc, c) } else { (fd, d) };
        let fcenter = g(center, &mut evaluations);
        if fcenter > local.0 {
            local = (fcenter, center);
        }
        // Near a smooth maximum golden section stalls once value differences
        // reach rounding level; a wide parabolic fit recovers the vertex.
        for _ in 0..2 {
            let (f0, t0) = local;
            let fm = g(t0 - PARABOLA_STEP, &mut evaluations);
            let fp = g(t0 + PARABOLA_STEP, &mut evaluations);
            let curvature = fp - 2.0 * f0 + fm;
            if curvature < 0.0 {
                let t = t0 - PARABOLA_STEP * (fp - fm) / (2.0 * curvature);
                let ft = g(t, &mut evaluations);
                if ft >= f0 {
                    local = (ft, t);
                }
            }
        }
        if local.0 > best.0 {
            best = local;
        }
    }
    Ok(SearchResult {
        value: best.0,
        argmax: Rotation2::from_angle(best.1.rem_euclid(TAU)),
        evaluations,
    })
}

/// Bob-side rotation that sends `c_z`, `c_x` into the z and z-x directions.
/// When the columns of `R` are orthogonal it diagonalizes `R`.
fn column_aligned(u: &UnitalChannel) -> Rotation3 {
    let r = u.matrix();
    let (r1, r2, _) = orthonormal_pair(
        &r.column(0).into_owned(),
        &r.column(1).into_owned(),
        1e-14,
    );
    Rotation3::from_two_rows(&r1, &r2)
}

fn twirled_weights(r: &Mat3) -> PauliDistribution {
    PauliDistribution::from_diagonal(&r.diagonal())
}

/// `F1~ = max_{O_B} 1 - H[q(diag(O_B·R))]`.
///
/// Errors if any evaluated diagonal has a Bell weight below `-1e-9`, which
/// cannot happen for a completely positive channel.
pub fn tilde_f1(u: &UnitalChannel, cfg: &SearchConfig) -> Result<SearchResult<Rotation3>> {
    if !u.is_cp() {
        let (component, value) = u.pauli().min();
        return Err(Error::NotCompletelyPositive { component, value });
    }
    let r = *u.matrix();
    let mut worst = (f64::INFINITY, Vec3::zeros());
    let seeds = [six_state_f1_plan(u).ob, column_aligned(u)];
    let result = maximize_so3_seeded(
        |o| {
            let rr = o.matrix() * r;
            let q = twirled_weights(&rr);
            let min = q.min().1;
            if min < worst.0 {
                worst = (min, rr.diagonal());
            }
            1.0 - shannon_unchecked(&q.as_array())
        },
        cfg,
        &seeds,
    )?;
    if worst.0 < -WEIGHT_ASSERT_TOL {
        return Err(Error::AssertionFailure(format!(
            "twirled weight {} at diagonal {:?}",
            worst.0,
            worst.1.as_slice()
        )));
    }
    Ok(result)
}

/// `G1~ = max_{Q_B} 1 - hb(S'_zz) - hb(S'_xx)` over plane rotations.
pub fn tilde_g1(u: &UnitalChannel, cfg: &SearchConfig) -> Result<SearchResult<Rotation2>> {
    let s = u.upper_left();
    let g1 = bb84_g1_plan(u).ob;
    let seed = Rotation2::from_matrix(g1.matrix().fixed_view::<2, 2>(0, 0).into_owned())
        .unwrap_or_else(|_| Rotation2::identity());
    maximize_so2_seeded(
        |q| {
            let sp = q.matrix() * s;
            1.0 - h_bloch(sp[(0, 0)]) - h_bloch(sp[(1, 1)])
        },
        cfg,
        &[Rotation2::identity(), seed],
    )
}

/// `J1~ = max_{O_B} 1 - hb(R'_zz) - hb(R'_xx)`.
pub fn tilde_j1(u: &UnitalChannel, cfg: &SearchConfig) -> Result<SearchResult<Rotation3>> {
    let r = *u.matrix();
    maximize_so3_seeded(
        |o| {
            let m = o.matrix();
            let zz = m.row(0).dot(&r.column(0).transpose());
            let xx = m.row(1).dot(&r.column(1).transpose());
            1.0 - h_bloch(zz) - h_bloch(xx)
        },
        cfg,
        &[Rotation3::identity(), column_aligned(u)],
    )
}

/// Maximizes `f(O_A, O_B)` over pairs of rotations.
///
/// The product grid would be too large, so the search is seeded only by the
/// identity pair, `seeds` and `2·RANDOM_STARTS` random pairs, each refined by
/// six-dimensional Nelder–Mead.
pub fn maximize_so3_pair<F: FnMut(&Rotation3, &Rotation3) -> f64>(
    mut f: F,
    cfg: &SearchConfig,
    seeds: &[(Rotation3, Rotation3)],
) -> Result<SearchResult<(Rotation3, Rotation3)>> {
    cfg.validate()?;
    let mut starts = vec![(Rotation3::identity(), Rotation3::identity())];
    starts.extend_from_slice(seeds);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    starts.extend((0..2 * RANDOM_STARTS).map(|_| (random_rotation(&mut rng), random_rotation(&mut rng))));
    let mut best = SearchResult {
        value: f64::NEG_INFINITY,
        argmax: starts[0],
        evaluations: 0,
    };
    let mut evaluations = 0;
    for (a0, b0) in starts {
        let at = |w: &[f64]| (local_rotation(&a0, &w[..3]), local_rotation(&b0, &w[3..]));
        let s = polish(
            |w| {
                let (a, b) = at(w);
                f(&a, &b)
            },
            &[0.0; 6],
            0.5,
            cfg,
        );
        evaluations += s.evaluations;
        if s.value > best.value {
            best.value = s.value;
            best.argmax = at(&s.x);
        }
    }
    best.evaluations = evaluations;
    Ok(best)
}

/// Maximizes `f(Q_A, Q_B)` over pairs of plane rotations: a square grid of
/// `4·coarse_grid` angles per side, then Nelder–Mead from the best point.
pub fn maximize_so2_pair<F: FnMut(&Rotation2, &Rotation2) -> f64>(
    mut f: F,
    cfg: &SearchConfig,
) -> Result<SearchResult<(Rotation2, Rotation2)>> {
    cfg.validate()?;
    let m = 4 * cfg.coarse_grid;
    let h = TAU / m as f64;
    let mut grid_best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..m {
        let qa = Rotation2::from_angle(h * i as f64);
        for j in 0..m {
            let v = finite_or_worst(f(&qa, &Rotation2::from_angle(h * j as f64)));
            if v > grid_best.0 {
                grid_best = (v, h * i as f64, h * j as f64);
            }
        }
    }
    let x0 = [grid_best.1, grid_best.2];
    let s = polish(
        |w| f(&Rotation2::from_angle(w[0]), &Rotation2::from_angle(w[1])),
        &x0,
        h,
        cfg,
    );
    let (value, x) = if s.value > grid_best.0 {
        (s.value, [s.x[0], s.x[1]])
    } else {
        (grid_best.0, x0)
    };
    Ok(SearchResult {
        value,
        argmax: (
            Rotation2::from_angle(x[0].rem_euclid(TAU)),
            Rotation2::from_angle(x[1].rem_euclid(TAU)),
        ),
        evaluations: m * m + s.evaluations,
    })
}

/// `F2~ = max_{O_A, O_B} 1 - H[q(diag(O_B·R·O_A))]`, searched without the
/// closed-form plan. Used to cross-check that it equals `F2`.
pub fn tilde_f2_search(u: &UnitalChannel, cfg: &SearchConfig) -> Result<SearchResult<(Rotation3, Rotation3)>> {
    if !u.is_cp() {
        let (component, value) = u.pauli().min();
        return Err(Error::NotCompletelyPositive { component, value });
    }
    let r = *u.matrix();
    maximize_so3_pair(
        |a, b| 1.0 - shannon_unchecked(&twirled_weights(&(b.matrix() * r * a.matrix())).as_array()),
        cfg,
        &[],
    )
}

/// `G2~ = max_{Q_A, Q_B} 1 - hb(S'_zz) - hb(S'_xx)`, searched numerically.
pub fn tilde_g2_search(u: &UnitalChannel, cfg: &SearchConfig) -> Result<SearchResult<(Rotation2, Rotation2)>> {
    let s = u.upper_left();
    maximize_so2_pair(
        |qa, qb| {
            let sp = qb.matrix() * s * qa.matrix();
            1.0 - h_bloch(sp[(0, 0)]) - h_bloch(sp[(1, 1)])
        },
        cfg,
    )
}

/// `J2~ = max_{O_A, O_B} 1 - hb(R'_zz) - hb(R'_xx)`, searched numerically.
pub fn tilde_j2_search(u: &UnitalChannel, cfg: &SearchConfig) -> Result<SearchResult<(Rotation3, Rotation3)>> {
    let r = *u.matrix();
    maximize_so3_pair(
        |a, b| {
            let m = b.matrix() * r * a.matrix();
            1.0 - h_bloch(m[(0, 0)]) - h_bloch(m[(1, 1)])
        },
        cfg,
        &[],
    )
}

/// Compensation settings with accurate channel estimation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccurateSetting {
    F1,
    F2,
    G1,
    G2,
    J1,
    J2,
}

impl AccurateSetting {
    pub const ALL: [AccurateSetting; 6] = [
        AccurateSetting::F1,
        AccurateSetting::F2,
        AccurateSetting::G1,
        AccurateSetting::G2,
        AccurateSetting::J1,
        AccurateSetting::J2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AccurateSetting::F1 => "f1",
            AccurateSetting::F2 => "f2",
            AccurateSetting::G1 => "g1",
            AccurateSetting::G2 => "g2",
            AccurateSetting::J1 => "j1",
            AccurateSetting::J2 => "j2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn two_side(self) -> bool {
        matches!(
            self,
            AccurateSetting::F2 | AccurateSetting::G2 | AccurateSetting::J2
        )
    }

    pub fn restriction(self) -> Restriction {
        match self {
            AccurateSetting::G1 | AccurateSetting::G2 => Restriction::ZxPlane,
            _ => Restriction::Full,
        }
    }

    /// Search dimension: three per SO(3) factor, one per SO(2) factor.
    pub fn dimension(self) -> usize {
        let per_side = match self.restriction() {
            Restriction::Full => 3,
            Restriction::ZxPlane => 1,
        };
        if self.two_side() {
            2 * per_side
        } else {
            per_side
        }
    }
}

/// Outcome of [`brute_force_max`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForce {
    /// Best of the raw random samples.
    pub best_sample: SearchResult<CompensationPlan>,
    /// The best sample after local refinement.
    pub refined: SearchResult<CompensationPlan>,
}

fn random_side<R: Rng>(rng: &mut R, restriction: Restriction) -> Rotation3 {
    match restriction {
        Restriction::Full => random_rotation(rng),
        Restriction::ZxPlane => {
            Rotation3::embed_zx(&Rotation2::from_angle(rng.random_range(0.0..TAU)))
        }
    }
}

fn perturb_side(base: &Rotation3, w: &[f64], restriction: Restriction) -> Rotation3 {
    match restriction {
        Restriction::Full => local_rotation(base, w),
        Restriction::ZxPlane => Rotation3::embed_zx(&Rotation2::from_angle(w[0])).then(base),
    }
}

/// Maximizes the accurate-estimation rate of `setting` by sampling
/// `cfg.samples` uniformly random compensations, then refining the best one.
///
/// Independent of the closed forms in [`crate::rates`], which it is meant to
/// check.
pub fn brute_force_max(
    u: &UnitalChannel,
    setting: AccurateSetting,
    cfg: &SearchConfig,
) -> Result<BruteForce> {
    cfg.validate()?;
    let six_state = matches!(setting, AccurateSetting::F1 | AccurateSetting::F2);
    if six_state && !u.is_cp() {
        let (component, value) = u.pauli().min();
        return Err(Error::NotCompletelyPositive { component, value });
    }
    let core = 1.0 - shannon_unchecked(&u.pauli().as_array());
    let r = *u.matrix();
    let restriction = setting.restriction();
    let two_side = setting.two_side();
    let rate = |plan: &CompensationPlan| {
        let mut m = plan.ob.matrix() * r;
        if let Some(oa) = &plan.oa {
            m *= oa.matrix();
        }
        if six_state {
            six_state_accurate_from(core, &m)
        } else {
            bb84_accurate_from(&m)
        }
    };
    let make_plan = |oa: Option<Rotation3>, ob: Rotation3| CompensationPlan {
        oa,
        ob,
        restriction,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<SearchResult<CompensationPlan>> = None;
    for _ in 0..cfg.samples {
        let ob = random_side(&mut rng, restriction);
        let oa = two_side.then(|| random_side(&mut rng, restriction));
        let plan = make_plan(oa, ob);
        let v = finite_or_worst(rate(&plan));
        if best.as_ref().is_none_or(|b| v > b.value) {
            best = Some(SearchResult {
                value: v,
                argmax: plan,
                evaluations: 0,
            });
        }
    }
    let mut best_sample = best.expect("samples is positive");
    best_sample.evaluations = cfg.samples;

    let per_side = setting.dimension() / if two_side { 2 } else { 1 };
    let base = best_sample.argmax;
    let plan_at = |w: &[f64]| {
        let ob = perturb_side(&base.ob, &w[..per_side], restriction);
        let oa = base
            .oa
            .map(|oa| perturb_side(&oa, &w[per_side..], restriction));
        make_plan(oa, ob)
    };
    let s = polish(|w| rate(&plan_at(w)), &vec![0.0; setting.dimension()], 0.1, cfg);
    let refined = if s.value > best_sample.value {
        SearchResult {
            value: s.value,
            argmax: plan_at(&s.x),
            evaluations: s.evaluations,
        }
    } else {
        SearchResult {
            evaluations: s.evaluations,
            ..best_sample
        }
    };
    Ok(BruteForce {
        best_sample,
        refined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{family, random_unital, Family, QubitChannel};
    use crate::linalg::orthogonality_error3;
    use crate::rates::{bb84_g2, bb84_j1, bb84_j2, six_state_f2};

    fn quick() -> SearchConfig {
        SearchConfig {
            coarse_grid: 12,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn config_validation() {
        assert!(SearchConfig::default().validate().is_ok());
        for bad in [
            SearchConfig {
                coarse_grid: 2,
                ..SearchConfig::default()
            },
            SearchConfig {
                refine_iters: 0,
                ..SearchConfig::default()
            },
            SearchConfig {
                tol: -1.0,
                ..SearchConfig::default()
            },
            SearchConfig {
                samples: 0,
                ..SearchConfig::default()
            },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn nelder_mead_finds_quadratic_peak() {
        let s = nelder_mead(
            |x| -(x[0] - 1.0).powi(2) - 2.0 * (x[1] + 0.5).powi(2),
            &[0.0, 0.0],
            0.3,
            1000,
            1e-14,
        );
        assert!((s.x[0] - 1.0).abs() < 1e-6 && (s.x[1] + 0.5).abs() < 1e-6);
        assert!(s.value > -1e-12);
    }

    #[test]
    fn so3_recovers_known_rotation() {
        let target = rotation3_from_euler(0.7, 1.9, -2.3);
        let res = maximize_so3(|o| (o.matrix().transpose() * target.matrix()).trace(), &quick())
            .unwrap();
        assert!((res.value - 3.0).abs() <= 1e-9);
        assert!((res.argmax.matrix() - target.matrix()).amax() <= 1e-4);
        assert!(orthogonality_error3(res.argmax.matrix()) <= 1e-12);
    }

    #[test]
    fn so2_argmax_is_sharp() {
        let res = maximize_so2(|q| (q.angle() - 1.234).cos(), &quick()).unwrap();
        assert!((res.argmax.angle() - 1.234).abs() <= 1e-8);
        assert!((res.value - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn search_is_deterministic() {
        let u = UnitalChannel::new(random_unital(11)).unwrap();
        let a = tilde_j1(&u, &quick()).unwrap();
        let b = tilde_j1(&u, &quick()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn conventional_never_beats_accurate() {
        for seed in 0..40 {
            let u = UnitalChannel::new(random_unital(seed)).unwrap();
            let f = six_state_f2(&u).unwrap().0.raw;
            let g = bb84_g2(&u).0.raw;
            let (j1, _, _, _) = bb84_j1(&u);
            let f1c = tilde_f1(&u, &quick()).unwrap().value;
            let g1c = tilde_g1(&u, &quick()).unwrap().value;
            let j1c = tilde_j1(&u, &quick()).unwrap().value;
            assert!(f1c <= f + 1e-12, "{seed}: {f1c} > {f}");
            assert!(g1c <= g + 1e-12, "{seed}: {g1c} > {g}");
            assert!(j1c <= j1.raw + 1e-12, "{seed}: {j1c} > {}", j1.raw);
        }
    }

    #[test]
    fn conventional_matches_accurate_for_orthogonal_columns() {
        // Columns of B·diag(e) are orthogonal.
        let b = rotation3_from_euler(0.3, 2.1, -0.8);
        let e = Vec3::new(0.85, -0.6, -0.5);
        let r = b.matrix() * Mat3::from_diagonal(&e);
        let u = UnitalChannel::new(QubitChannel::unital(r).unwrap()).unwrap();
        let f = six_state_f2(&u).unwrap().0.raw;
        let j1 = bb84_j1(&u).0.raw;
        assert!((tilde_f1(&u, &quick()).unwrap().value - f).abs() <= 1e-10);
        assert!((tilde_j1(&u, &quick()).unwrap().value - j1).abs() <= 1e-10);
    }

    #[test]
    fn conventional_g1_of_rotated_block() {
        let q = Rotation2::from_angle(0.4);
        let s = q.matrix() * Mat3::from_diagonal(&Vec3::new(0.9, 0.7, 0.6)).fixed_view::<2, 2>(0, 0);
        let mut r = Mat3::from_diagonal(&Vec3::new(0.9, 0.7, 0.6));
        r.fixed_view_mut::<2, 2>(0, 0).copy_from(&s);
        let u = UnitalChannel::new(QubitChannel::unital(r).unwrap()).unwrap();
        let res = tilde_g1(&u, &quick()).unwrap();
        let g = bb84_g2(&u).0.raw;
        assert!((res.value - g).abs() <= 1e-12);
    }

    #[test]
    fn tilde_f1_rejects_non_cp() {
        let r = Mat3::from_diagonal(&Vec3::new(0.5, 0.7, 0.9));
        let u = UnitalChannel::contraction(QubitChannel::unital(r).unwrap()).unwrap();
        assert!(matches!(
            tilde_f1(&u, &quick()),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    #[test]
    fn brute_force_bounded_by_closed_forms() {
        let cfg = SearchConfig {
            samples: 2000,
            ..SearchConfig::default()
        };
        for seed in 0..5 {
            let u = UnitalChannel::new(random_unital(seed)).unwrap();
            let f = six_state_f2(&u).unwrap().0.raw;
            let g = bb84_g2(&u).0.raw;
            let j1 = bb84_j1(&u).0.raw;
            let j2 = bb84_j2(&u).0.raw;
            for (setting, closed) in [
                (AccurateSetting::F1, f),
                (AccurateSetting::F2, f),
                (AccurateSetting::G1, g),
                (AccurateSetting::G2, g),
                (AccurateSetting::J1, j1),
                (AccurateSetting::J2, j2),
            ] {
                let bf = brute_force_max(&u, setting, &cfg).unwrap();
                assert!(bf.best_sample.value <= closed + 1e-12);
                assert!(bf.refined.value <= closed + 1e-12);
                assert!(bf.refined.value >= bf.best_sample.value);
                assert!(closed - bf.refined.value <= 1e-6, "{setting:?}");
                let plan = bf.refined.argmax;
                assert_eq!(plan.oa.is_some(), setting.two_side());
                if setting.restriction() == Restriction::ZxPlane {
                    assert!(plan.ob.fixes_y(1e-12));
                }
            }
        }
    }

    #[test]
    fn two_side_searches_reach_closed_forms() {
        for seed in 0..10 {
            let u = UnitalChannel::new(random_unital(seed)).unwrap();
            let f2 = six_state_f2(&u).unwrap().0.raw;
            let g2 = bb84_g2(&u).0.raw;
            let j2 = bb84_j2(&u).0.raw;
            let f = tilde_f2_search(&u, &quick()).unwrap().value;
            let g = tilde_g2_search(&u, &quick()).unwrap().value;
            let j = tilde_j2_search(&u, &quick()).unwrap().value;
            assert!((f - f2).abs() <= 1e-9, "{seed}: {f} vs {f2}");
            assert!((g - g2).abs() <= 1e-9, "{seed}: {g} vs {g2}");
            assert!((j - j2).abs() <= 1e-9, "{seed}: {j} vs {j2}");
        }
    }

    #[test]
    fn depolarizing_is_already_optimal() {
        let u = UnitalChannel::new(family(&Family::Depolarizing { qber: 0.08 }).unwrap()).unwrap();
        let res = tilde_f1(&u, &quick()).unwrap();
        assert!((res.value - six_state_f2(&u).unwrap().0.raw).abs() <= 1e-12);
    }
}
