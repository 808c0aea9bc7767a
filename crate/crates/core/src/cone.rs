//! Maximum likelihood jumps under a general polyhedral constraint
//! `M b >= 0`.
//!
//! The per-time objective `log(x'b) - s'b` is maximised on an extreme ray of
//! the cone, at `b = v / (s'v)` with value `log(x'v / s'v) - 1`, so each
//! solver is really searching for the ray with the largest ratio
//! `x'v / s'v`:
//!
//! - [`mle_jump_cone_naive`] enumerates every extreme ray;
//! - [`mle_jump_cone_ascending`] walks from edge to adjacent edge along
//!   2-faces, always increasing the ratio;
//! - [`mle_jump_cone_descending`] solves on a relaxed row subset and adds the
//!   most violated row until the relaxed optimum is feasible.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::data::{build_event_table, Dataset};
use crate::error::{Error, Result};
use crate::fit::{FitResult, Method, TimeDiagnostic};
use crate::linalg::{self, dot, norm};
use crate::mle::{JumpSolution, TIE_TOLERANCE};

/// Relative tolerance for numerical rank and null-space decisions.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Slack below which a unit ray counts as lying on a (unit) row hyperplane.
pub const ACTIVE_TOLERANCE: f64 = 1e-9;
/// Largest negative slack accepted as feasible.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-10;
/// Rays closer than this (max-norm, both unit length) are merged.
pub const DEDUP_TOLERANCE: f64 = 1e-9;
/// Largest `p` accepted by [`full_constraint_cone`].
pub const MAX_FULL_CONE_P: usize = 20;

const MAX_PIVOTS: usize = 10_000;

/// The cone `{b : M b >= 0}` given by its rows `M_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintCone {
    rows: Vec<Vec<f64>>,
    dim: usize,
    /// Rows scaled to unit length; same cone, used for every tolerance test.
    unit_rows: Vec<Vec<f64>>,
}

impl ConstraintCone {
    /// Builds a cone from `r` rows of equal width `p + 1`. The rows must
    /// have full column rank so that the cone is pointed.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::Config(String::from("constraint matrix is empty")));
        }
        if let Some(i) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::Config(alloc::format!("constraint row {i} has {} columns, expected {dim}", rows[i].len())));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config(String::from("constraint matrix has non-finite entries")));
        }
        let mut unit_rows = Vec::with_capacity(rows.len());
        for r in &rows {
            let n = norm(r);
            if n == 0.0 {
                return Err(Error::Config(String::from("constraint matrix has a zero row")));
            }
            unit_rows.push(r.iter().map(|v| v / n).collect());
        }
        let cone = ConstraintCone { rows, dim, unit_rows };
        let rank = linalg::rank(&cone.flat_unit(), cone.len(), dim, RANK_TOLERANCE);
        if rank < dim {
            return Err(Error::Rank { rank, needed: dim });
        }
        Ok(cone)
    }

    /// Nonnegative orthant in `dim` coordinates.
    pub fn orthant(dim: usize) -> Result<Self> {
        ConstraintCone::new(
            (0..dim)
                .map(|i| {
                    let mut r = vec![0.0; dim];
                    r[i] = 1.0;
                    r
                })
                .collect(),
        )
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Width `p + 1` of each row.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Slacks `M b`.
    pub fn slack(&self, beta: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| dot(r, beta)).collect()
    }

    /// Smallest slack of `M b` after scaling every row to unit length.
    pub fn min_unit_slack(&self, beta: &[f64]) -> f64 {
        self.unit_rows.iter().map(|r| dot(r, beta)).fold(f64::INFINITY, f64::min)
    }

    fn flat_unit(&self) -> Vec<f64> {
        self.unit_rows.iter().flatten().copied().collect()
    }

    fn subset(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().flat_map(|&i| self.unit_rows[i].iter().copied()).collect()
    }

    fn sub_cone(&self, idx: &[usize]) -> Result<ConstraintCone> {
        ConstraintCone::new(idx.iter().map(|&i| self.rows[i].clone()).collect())
    }

    fn is_feasible(&self, v: &[f64]) -> bool {
        self.min_unit_slack(v) >= -FEASIBILITY_TOLERANCE
    }

    fn active_rows(&self, v: &[f64]) -> Vec<usize> {
        self.unit_rows
            .iter()
            .enumerate()
            .filter(|(_, r)| dot(r, v).abs() <= ACTIVE_TOLERANCE)
            .map(|(i, _)| i)
            .collect()
    }
}

/// The `2^p` rows `(1, m_1, .., m_p)`, `m` ranging over `{0, 1}^p` in binary
/// counting order with `m_1` most significant.
pub fn full_constraint_cone(p: usize) -> Result<ConstraintCone> {
    if p > MAX_FULL_CONE_P {
        return Err(Error::Size(alloc::format!("full constraint cone for p = {p} has 2^{p} rows (limit p = {MAX_FULL_CONE_P})")));
    }
    let rows = (0..1usize << p)
        .map(|i| {
            let mut r = Vec::with_capacity(p + 1);
            r.push(1.0);
            r.extend((0..p).map(|j| ((i >> (p - 1 - j)) & 1) as f64));
            r
        })
        .collect();
    ConstraintCone::new(rows)
}

/// An extreme ray of a cone: unit direction and every row active on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Ray {
    pub direction: Vec<f64>,
    pub active_rows: Vec<usize>,
}

fn push_unique(rays: &mut Vec<Ray>, cone: &ConstraintCone, v: Vec<f64>) {
    let dup = rays.iter().any(|r| {
        r.direction.iter().zip(&v).all(|(a, b)| (a - b).abs() <= DEDUP_TOLERANCE)
    });
    if !dup {
        let active_rows = cone.active_rows(&v);
        rays.push(Ray { direction: v, active_rows });
    }
}

/// Bit set over row indices.
#[derive(Clone, PartialEq, Eq)]
struct RowSet(Vec<u64>);

impl RowSet {
    fn new(n: usize) -> Self {
        RowSet(vec![0; n.div_ceil(64)])
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn intersect(&self, other: &RowSet) -> RowSet {
        RowSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn is_subset(&self, other: &RowSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
}

struct DdRay {
    v: Vec<f64>,
    zeros: RowSet,
}

/// Extreme rays of the cone, computed by the double description method:
/// start from the simplicial cone of `p + 1` independent rows and intersect
/// with one half-space at a time, combining adjacent pairs of rays on
/// opposite sides of each new hyperplane.
pub fn extreme_rays(cone: &ConstraintCone) -> Result<Vec<Ray>> {
    let n = cone.dim;
    let r = cone.len();
    let basis = linalg::independent_rows(&cone.flat_unit(), r, n, RANK_TOLERANCE);
    if basis.len() < n {
        return Err(Error::Rank { rank: basis.len(), needed: n });
    }
    let mb = cone.subset(&basis);
    let mut rays: Vec<DdRay> = Vec::with_capacity(n);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let mut v = linalg::solve(&mb, n, &e, RANK_TOLERANCE).ok_or(Error::Rank { rank: n - 1, needed: n })?;
        linalg::normalize(&mut v);
        let mut zeros = RowSet::new(r);
        for (pos, &b) in basis.iter().enumerate() {
            if pos != k {
                zeros.insert(b);
            }
        }
        rays.push(DdRay { v, zeros });
    }
    let in_basis: BTreeSet<usize> = basis.iter().copied().collect();
    for i in (0..r).filter(|i| !in_basis.contains(i)) {
        let row = &cone.unit_rows[i];
        let vals: Vec<f64> = rays.iter().map(|ray| dot(row, &ray.v)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] > ACTIVE_TOLERANCE).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k] < -ACTIVE_TOLERANCE).collect();
        if neg.is_empty() {
            for (k, ray) in rays.iter_mut().enumerate() {
                if vals[k].abs() <= ACTIVE_TOLERANCE {
                    ray.zeros.insert(i);
                }
            }
            continue;
        }
        let mut next: Vec<DdRay> = Vec::with_capacity(rays.len());
        for &a in &pos {
            for &b in &neg {
                let common = rays[a].zeros.intersect(&rays[b].zeros);
                if common.count() + 2 < n {
                    continue;
                }
                let adjacent = (0..rays.len())
                    .filter(|&c| c != a && c != b)
                    .all(|c| !common.is_subset(&rays[c].zeros));
                if !adjacent {
                    continue;
                }
                let (va, vb) = (vals[a], vals[b]);
                let mut w: Vec<f64> = rays[b].v.iter().zip(&rays[a].v).map(|(rb, ra)| va * rb - vb * ra).collect();
                if !linalg::normalize(&mut w) {
                    continue;
                }
                let mut zeros = common;
                zeros.insert(i);
                next.push(DdRay { v: w, zeros });
            }
        }
        for (k, mut ray) in rays.into_iter().enumerate() {
            if vals[k] > ACTIVE_TOLERANCE {
                next.push(ray);
            } else if vals[k] >= -ACTIVE_TOLERANCE {
                ray.zeros.insert(i);
                next.push(ray);
            }
        }
        rays = next;
    }
    let mut out = Vec::with_capacity(rays.len());
    for ray in rays {
        push_unique(&mut out, cone, ray.v);
    }
    Ok(out)
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) struct Combinations {
    idx: Vec<usize>,
    n: usize,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Combinations { idx: (0..k).collect(), n, done: k > n }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in (i + 1)..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Null direction of the rows in `idx`, oriented to satisfy the whole cone
/// if either orientation does.
fn oriented_edge(cone: &ConstraintCone, idx: &[usize]) -> Option<Vec<f64>> {
    let n = cone.dim;
    let mut v = linalg::null_vector(&cone.subset(idx), idx.len(), n, RANK_TOLERANCE)?;
    if cone.is_feasible(&v) {
        return Some(v);
    }
    v.iter_mut().for_each(|c| *c = -*c);
    cone.is_feasible(&v).then_some(v)
}

/// Extreme rays by brute force: the null direction of every rank-`p` row
/// subset of size `p`, kept when feasible. Cost grows as `C(r, p)`.
pub fn extreme_rays_by_subsets(cone: &ConstraintCone) -> Result<Vec<Ray>> {
    let n = cone.dim;
    let mut out = Vec::new();
    for idx in Combinations::new(cone.len(), n - 1) {
        if let Some(v) = oriented_edge(cone, &idx) {
            push_unique(&mut out, cone, v);
        }
    }
    Ok(out)
}

/// Outcome of maximising the per-time objective along one ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeValue {
    /// Optimum at `b = l * v`, worth `value = log(x'v / s'v) - 1`.
    Finite { l: f64, value: f64, ratio: f64 },
    /// `x'v <= 0`: the failing subject has no positive hazard on this edge.
    Excluded,
    /// `x'v > 0` but `s'v <= 0`: the objective grows without bound.
    Unbounded,
}

pub fn edge_maximum(v: &[f64], x: &[f64], s: &[f64]) -> EdgeValue {
    let xv = dot(x, v);
    let sv = dot(s, v);
    let x_scale = norm(x) * norm(v);
    if xv <= 1e-12 * x_scale {
        return EdgeValue::Excluded;
    }
    if sv <= 1e-12 * norm(s) * norm(v) {
        return EdgeValue::Unbounded;
    }
    let ratio = xv / sv;
    EdgeValue::Finite { l: 1.0 / sv, value: libm::log(ratio) - 1.0, ratio }
}

/// A direction `b` in the cone spanned by `rays` with `x'b > 0 >= s'b`, if
/// one exists. Besides single unbounded rays this covers pairs `u, w` with
/// `s'u > 0 > s'w`, whose combination `(s'u) w - (s'w) u` lies on `s'b = 0`.
fn unbounded_direction(rays: &[Ray], x: &[f64], s: &[f64]) -> Option<Vec<f64>> {
    let s_norm = norm(s);
    let mut rising = Vec::new();
    let mut falling = Vec::new();
    for ray in rays {
        let v = &ray.direction;
        match edge_maximum(v, x, s) {
            EdgeValue::Unbounded => return Some(v.clone()),
            EdgeValue::Finite { .. } => rising.push(v),
            EdgeValue::Excluded => {
                if dot(s, v) < -1e-12 * s_norm * norm(v) {
                    falling.push(v);
                }
            }
        }
    }
    for u in &rising {
        let su = dot(s, u);
        for w in &falling {
            let sw = dot(s, w);
            let b: Vec<f64> = w.iter().zip(u.iter()).map(|(wi, ui)| su * wi - sw * ui).collect();
            if dot(x, &b) > 1e-12 * norm(x) * norm(&b) {
                return Some(b);
            }
        }
    }
    None
}

/// Best ratio with the optimal `(ray index, scale)` pairs.
type Winners = (f64, Vec<(usize, f64)>);

/// Best edges among `rays`; `Ok(None)` when every edge is excluded.
fn best_rays(rays: &[Ray], x: &[f64], s: &[f64]) -> Result<Option<Winners>> {
    if unbounded_direction(rays, x, s).is_some() {
        return Err(Error::DegenerateRiskSet { time: None });
    }
    let mut evals = Vec::with_capacity(rays.len());
    for (k, ray) in rays.iter().enumerate() {
        if let EdgeValue::Finite { l, ratio, .. } = edge_maximum(&ray.direction, x, s) {
            evals.push((k, l, ratio));
        }
    }
    let best = evals.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
    if evals.is_empty() {
        return Ok(None);
    }
    let cutoff = best - TIE_TOLERANCE * best.abs();
    let winners = evals.into_iter().filter(|e| e.2 >= cutoff).map(|(k, l, _)| (k, l)).collect();
    Ok(Some((best, winners)))
}

fn solution_from_rays(rays: &[Ray], x: &[f64], s: &[f64]) -> Result<JumpSolution> {
    let (best, winners) = best_rays(rays, x, s)?.ok_or(Error::NoPositiveRatio { time: None })?;
    let candidates = winners
        .iter()
        .map(|&(k, l)| rays[k].direction.iter().map(|v| v * l).collect())
        .collect();
    Ok(JumpSolution::from_candidates(candidates, best))
}

/// Evaluates every extreme ray and averages the optimal ones.
pub fn mle_jump_cone_naive(c: &ConstraintCone, x: &[f64], s: &[f64]) -> Result<JumpSolution> {
    check_dims(c, x, s)?;
    let rays = extreme_rays(c)?;
    solution_from_rays(&rays, x, s)
}

fn check_dims(c: &ConstraintCone, x: &[f64], s: &[f64]) -> Result<()> {
    if x.len() != c.dim || s.len() != c.dim {
        return Err(Error::Config(alloc::format!(
            "constraint matrix has {} columns but covariate vectors have {}",
            c.dim,
            x.len()
        )));
    }
    Ok(())
}

/// Current edge of the ascending search: `p` active rows and their ray.
struct Edge {
    basis: Vec<usize>,
    v: Vec<f64>,
    ratio: f64,
}

fn edge_ratio(v: &[f64], x: &[f64], s: &[f64]) -> Result<Option<f64>> {
    match edge_maximum(v, x, s) {
        EdgeValue::Finite { ratio, .. } => Ok(Some(ratio)),
        EdgeValue::Unbounded => Err(Error::DegenerateRiskSet { time: None }),
        EdgeValue::Excluded => {
            // still usable as a starting point when s'v > 0
            let sv = dot(s, v);
            Ok((sv > 1e-12 * norm(s)).then(|| dot(x, v) / sv))
        }
    }
}

fn start_edge(c: &ConstraintCone, x: &[f64], s: &[f64], start: Option<&[usize]>) -> Result<Edge> {
    let p = c.dim - 1;
    if let Some(idx) = start {
        let mut basis = idx.to_vec();
        basis.sort_unstable();
        basis.dedup();
        if basis.len() != p || basis.iter().any(|&i| i >= c.len()) {
            return Err(Error::StartNotFeasible);
        }
        let v = oriented_edge(c, &basis).ok_or(Error::StartNotFeasible)?;
        let ratio = edge_ratio(&v, x, s)?.ok_or(Error::StartNotFeasible)?;
        return Ok(Edge { basis, v, ratio });
    }
    for basis in Combinations::new(c.len(), p) {
        if let Some(v) = oriented_edge(c, &basis) {
            if let Some(ratio) = edge_ratio(&v, x, s)? {
                return Ok(Edge { basis, v, ratio });
            }
        }
    }
    Err(Error::StartNotFeasible)
}

/// Local edge search. Each pivot releases one active row `j` (the one whose
/// release gives the largest directional derivative of the objective, lowest
/// row index on ties) and follows the 2-face spanned by the remaining active
/// rows to its other edge, which has a strictly larger ratio. Degenerate
/// edges, where extra rows block the face, take a Bland-rule basis change
/// without moving. The search stops when no released row gives ascent, which
/// certifies optimality; if it stalls instead, the naive search takes over
/// and [`JumpSolution::fallback`] is set.
pub fn mle_jump_cone_ascending(
    c: &ConstraintCone,
    x: &[f64],
    s: &[f64],
    start: Option<&[usize]>,
) -> Result<JumpSolution> {
    check_dims(c, x, s)?;
    let n = c.dim;
    let p = n - 1;
    let mut edge = match start_edge(c, x, s, start) {
        Err(Error::StartNotFeasible) if start.is_none() => {
            // no edge with s'v > 0; the naive search classifies the problem
            let mut sol = mle_jump_cone_naive(c, x, s)?;
            sol.fallback = true;
            return Ok(sol);
        }
        other => other?,
    };
    let mut path = vec![edge.ratio];
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut certified = p == 0;

    for _ in 0..MAX_PIVOTS {
        if certified {
            break;
        }
        // Directions d_j with M_A d_j = e_j and v'd_j = 0.
        let mut system = c.subset(&edge.basis);
        system.extend_from_slice(&edge.v);
        let g: Vec<f64> = x.iter().zip(s).map(|(xi, si)| xi - edge.ratio * si).collect();
        let g_norm = norm(&g);
        let mut ascent: Vec<(usize, f64)> = Vec::new();
        for j in 0..p {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let Some(d) = linalg::solve(&system, n, &e, RANK_TOLERANCE) else { continue };
            let cj = dot(&g, &d);
            if cj > 1e-10 * g_norm * norm(&d) {
                ascent.push((j, cj));
            }
        }
        if ascent.is_empty() {
            certified = true;
            break;
        }
        ascent.sort_by(|a, b| b.1.total_cmp(&a.1).then(edge.basis[a.0].cmp(&edge.basis[b.0])));

        let mut strict: Option<Edge> = None;
        let mut degenerate: Option<(usize, usize)> = None;
        'release: for &(j, _) in &ascent {
            let leaving = edge.basis[j];
            for q in 0..c.len() {
                if edge.basis.contains(&q) {
                    continue;
                }
                let mut basis: Vec<usize> = edge.basis.iter().copied().filter(|&b| b != leaving).collect();
                basis.push(q);
                basis.sort_unstable();
                let Some(mut w) = linalg::null_vector(&c.subset(&basis), p, n, RANK_TOLERANCE) else { continue };
                let off = dot(&c.unit_rows[leaving], &w);
                if off.abs() <= ACTIVE_TOLERANCE {
                    continue;
                }
                if off < 0.0 {
                    w.iter_mut().for_each(|v| *v = -*v);
                }
                if !c.is_feasible(&w) {
                    continue;
                }
                let parallel = w.iter().zip(&edge.v).all(|(a, b)| (a - b).abs() <= DEDUP_TOLERANCE);
                if parallel {
                    if degenerate.is_none_or(|(dl, dq)| (leaving, q) < (dl, dq)) {
                        degenerate = Some((leaving, q));
                    }
                    continue;
                }
                let Some(ratio) = edge_ratio(&w, x, s)? else { continue };
                if ratio > edge.ratio + 1e-12 * edge.ratio.abs() {
                    strict = Some(Edge { basis, v: w, ratio });
                    break 'release;
                }
            }
        }
        match (strict, degenerate) {
            (Some(next), _) => {
                path.push(next.ratio);
                seen.clear();
                edge = next;
            }
            (None, Some((leaving, q))) => {
                if !seen.insert(edge.basis.clone()) {
                    break;
                }
                edge.basis.retain(|&b| b != leaving);
                edge.basis.push(q);
                edge.basis.sort_unstable();
            }
            (None, None) => break,
        }
    }

    // a certificate at a nonpositive ratio does not bound x'b where s'b < 0
    if !certified || !(edge.ratio > 0.0) {
        let mut sol = mle_jump_cone_naive(c, x, s)?;
        path.push(sol.max_ratio);
        sol.path = path;
        sol.fallback = true;
        return Ok(sol);
    }
    let l = 1.0 / dot(s, &edge.v);
    let beta = edge.v.iter().map(|v| v * l).collect();
    let mut sol = JumpSolution::from_candidates(vec![beta], edge.ratio);
    sol.path = path;
    Ok(sol)
}

/// Initial working rows for the descending search: `p + 1` independent rows
/// taken greedily in order of decreasing alignment with `s`.
fn relaxed_start(c: &ConstraintCone, s: &[f64]) -> Vec<usize> {
    let s_norm = norm(s).max(f64::MIN_POSITIVE);
    let mut order: Vec<usize> = (0..c.len()).collect();
    let align: Vec<f64> = c.unit_rows.iter().map(|r| dot(r, s) / s_norm).collect();
    order.sort_by(|&a, &b| align[b].total_cmp(&align[a]).then(a.cmp(&b)));
    let flat: Vec<f64> = order.iter().flat_map(|&i| c.unit_rows[i].iter().copied()).collect();
    let picked = linalg::independent_rows(&flat, order.len(), c.dim, RANK_TOLERANCE);
    let mut rows: Vec<usize> = picked.into_iter().map(|k| order[k]).collect();
    rows.sort_unstable();
    rows
}

/// Most violated row for direction `v` (lowest index on ties), if any.
fn most_violated(c: &ConstraintCone, v: &[f64], working: &[usize]) -> Option<usize> {
    let mut worst: Option<(usize, f64)> = None;
    for (i, r) in c.unit_rows.iter().enumerate() {
        if working.contains(&i) {
            continue;
        }
        let slack = dot(r, v);
        if slack < -FEASIBILITY_TOLERANCE && worst.is_none_or(|(_, w)| slack < w) {
            worst = Some((i, slack));
        }
    }
    worst.map(|(i, _)| i)
}

/// Relaxation search: maximise over the cone of a working row subset, then
/// add the most violated row and repeat until the relaxed optimum satisfies
/// every row. Optimal ratios along the way never increase.
pub fn mle_jump_cone_descending(c: &ConstraintCone, x: &[f64], s: &[f64]) -> Result<JumpSolution> {
    check_dims(c, x, s)?;
    let mut working = relaxed_start(c, s);
    let mut path = Vec::new();
    loop {
        let sub = c.sub_cone(&working)?;
        let rays = extreme_rays(&sub)?;
        let witness = if let Some(b) = unbounded_direction(&rays, x, s) {
            path.push(f64::INFINITY);
            b
        } else {
            let (best, winners) = best_rays(&rays, x, s)?.ok_or(Error::NoPositiveRatio { time: None })?;
            path.push(best);
            let feasible: Vec<(usize, f64)> =
                winners.iter().copied().filter(|&(k, _)| c.is_feasible(&rays[k].direction)).collect();
            if !feasible.is_empty() {
                let candidates = feasible
                    .iter()
                    .map(|&(k, l)| rays[k].direction.iter().map(|v| v * l).collect())
                    .collect();
                let mut sol = JumpSolution::from_candidates(candidates, best);
                sol.path = path;
                return Ok(sol);
            }
            rays[winners[0].0].direction.clone()
        };
        match most_violated(c, &witness, &working) {
            Some(i) => {
                working.push(i);
                working.sort_unstable();
            }
            // an unbounded direction that satisfies every row
            None => return Err(Error::DegenerateRiskSet { time: None }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConeMethod {
    #[default]
    Naive,
    Ascending,
    Descending,
}

impl ConeMethod {
    pub fn label(self) -> &'static str {
        match self {
            ConeMethod::Naive => "naive",
            ConeMethod::Ascending => "ascending",
            ConeMethod::Descending => "descending",
        }
    }
}

impl fmt::Display for ConeMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ConeMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(ConeMethod::Naive),
            "ascending" => Ok(ConeMethod::Ascending),
            "descending" => Ok(ConeMethod::Descending),
            other => Err(Error::Config(alloc::format!("unknown cone solver `{other}`"))),
        }
    }
}

/// Per-event-time cone-constrained maximum likelihood, assembled like
/// [`crate::mle::fit_mle`]. The naive solver enumerates the rays once and
/// reuses them for every event time.
pub fn fit_mle_cone(d: &Dataset, c: &ConstraintCone, method: ConeMethod) -> Result<FitResult> {
    if c.dim != d.p + 1 {
        return Err(Error::Config(alloc::format!(
            "constraint matrix has {} columns, data need {}",
            c.dim,
            d.p + 1
        )));
    }
    let table = build_event_table(d)?;
    let rays = match method {
        ConeMethod::Naive => Some(extreme_rays(c)?),
        _ => None,
    };
    let mut jumps = Vec::with_capacity(table.len());
    let mut logliks = Vec::with_capacity(table.len());
    let mut diagnostics = Vec::with_capacity(table.len());
    for k in 0..table.len() {
        let (x, s) = (&table.failing_covariates[k], &table.risk_sums[k]);
        let sol = match method {
            ConeMethod::Naive => solution_from_rays(rays.as_deref().unwrap_or_default(), x, s),
            ConeMethod::Ascending => mle_jump_cone_ascending(c, x, s, None),
            ConeMethod::Descending => mle_jump_cone_descending(c, x, s),
        }
        .map_err(|e| e.at_time(table.event_times[k]))?;
        diagnostics.push(TimeDiagnostic {
            rank_deficient: false,
            multiplicity: sol.candidates.len(),
            fallback: sol.fallback,
        });
        logliks.push(sol.per_time_loglik);
        jumps.push(sol.averaged);
    }
    Ok(FitResult::assemble(d, Method::MleCone, table.event_times, jumps, Some(logliks), diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_dirs(rays: &[Ray]) -> Vec<Vec<f64>> {
        let mut d: Vec<Vec<f64>> = rays.iter().map(|r| r.direction.clone()).collect();
        d.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(core::cmp::Ordering::Equal));
        d
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    const H: f64 = core::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn full_cone_rows() {
        let c = full_constraint_cone(2).unwrap();
        assert_eq!(c.rows(), [vec![1.0, 0.0, 0.0], vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 0.0], vec![1.0, 1.0, 1.0]]);
        assert_eq!(full_constraint_cone(1).unwrap().rows(), [vec![1.0, 0.0], vec![1.0, 1.0]]);
        assert!(matches!(full_constraint_cone(21), Err(Error::Size(_))));
    }

    #[test]
    fn rank_deficient_cone_is_rejected() {
        let e = ConstraintCone::new(vec![vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap_err();
        assert_eq!(e, Error::Rank { rank: 1, needed: 2 });
    }

    #[test]
    fn full_cone_p2_rays() {
        let rays = extreme_rays(&full_constraint_cone(2).unwrap()).unwrap();
        let want = [vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![H, -H, 0.0], vec![H, 0.0, -H]];
        let got = sorted_dirs(&rays);
        assert_eq!(got.len(), 4);
        for (g, w) in got.iter().zip(&want) {
            assert!(close(g, w, 1e-12), "{got:?}");
        }
        for ray in &rays {
            assert_eq!(ray.active_rows.len(), 2);
        }
    }

    #[test]
    fn orthant_rays_are_axes() {
        let rays = extreme_rays(&ConstraintCone::orthant(3).unwrap()).unwrap();
        let got = sorted_dirs(&rays);
        assert_eq!(got, [vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]);
    }

    #[test]
    fn full_cone_p3_has_six_rays_both_ways() {
        let c = full_constraint_cone(3).unwrap();
        let dd = sorted_dirs(&extreme_rays(&c).unwrap());
        let brute = sorted_dirs(&extreme_rays_by_subsets(&c).unwrap());
        assert_eq!(dd.len(), 6);
        assert_eq!(brute.len(), 6);
        for (a, b) in dd.iter().zip(&brute) {
            assert!(close(a, b, 1e-12));
        }
    }

    #[test]
    fn edge_maximum_cases() {
        let x = [1.0, 0.0, 1.0];
        let s = [8.0, 5.0, 6.0];
        match edge_maximum(&[1.0, -1.0, 0.0], &x, &s) {
            EdgeValue::Finite { l, value, .. } => {
                assert!((l - 1.0 / 3.0).abs() < 1e-15);
                assert!((value - (libm::log(1.0 / 3.0) - 1.0)).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(edge_maximum(&[0.0, 1.0, 0.0], &x, &s), EdgeValue::Excluded);
        assert_eq!(edge_maximum(&[1.0, 0.0, -1.0], &[1.0, 0.0, 0.5], &[4.0, 1.0, 4.0]), EdgeValue::Unbounded);
    }

    #[test]
    fn naive_matches_closed_form_on_worked_example() {
        let c = full_constraint_cone(2).unwrap();
        let sol = mle_jump_cone_naive(&c, &[1.0, 0.0, 1.0], &[8.0, 5.0, 6.0]).unwrap();
        assert_eq!(sol.candidates.len(), 1);
        assert!(close(&sol.averaged, &[1.0 / 3.0, -1.0 / 3.0, 0.0], 1e-15));
    }

    #[test]
    fn orthant_picks_best_axis() {
        let c = ConstraintCone::orthant(3).unwrap();
        let (x, s) = ([1.0, 0.3, 0.9], [6.0, 2.0, 3.0]);
        let sol = mle_jump_cone_naive(&c, &x, &s).unwrap();
        // x_j / s_j = 1/6, 0.15, 0.3
        assert!(close(&sol.averaged, &[0.0, 0.0, 1.0 / 3.0], 1e-15));
        assert!((sol.max_ratio - 0.3).abs() < 1e-15);
    }

    #[test]
    fn duplicated_rows_change_nothing() {
        let base = full_constraint_cone(2).unwrap();
        let mut rows = base.rows().to_vec();
        rows.push(vec![2.0, 0.0, 2.0]);
        rows.push(vec![1.0, 1.0, 1.0]);
        let dup = ConstraintCone::new(rows).unwrap();
        let (x, s) = ([1.0, 0.2, 0.7], [9.0, 4.0, 5.5]);
        let a = mle_jump_cone_naive(&base, &x, &s).unwrap();
        let b = mle_jump_cone_naive(&dup, &x, &s).unwrap();
        assert!(close(&a.averaged, &b.averaged, 1e-14));
        assert_eq!(extreme_rays(&dup).unwrap().len(), 4);
    }

    #[test]
    fn ascending_pivots_from_worse_edge() {
        let c = full_constraint_cone(2).unwrap();
        let (x, s) = ([1.0, 0.0, 1.0], [8.0, 5.0, 6.0]);
        // rows (1,0,0) and (1,1,0) active: ray (0,0,1), ratio 1/6
        let sol = mle_jump_cone_ascending(&c, &x, &s, Some(&[0, 2])).unwrap();
        assert!((sol.path[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((sol.max_ratio - 1.0 / 3.0).abs() < 1e-14);
        assert!(close(&sol.averaged, &[1.0 / 3.0, -1.0 / 3.0, 0.0], 1e-14));
        assert!(!sol.fallback);
        assert!(sol.path.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn ascending_fixed_point_at_optimum() {
        let c = full_constraint_cone(2).unwrap();
        let (x, s) = ([1.0, 0.0, 1.0], [8.0, 5.0, 6.0]);
        // rows (1,1,0),(1,1,1) active: ray (1,-1,0)
        let sol = mle_jump_cone_ascending(&c, &x, &s, Some(&[2, 3])).unwrap();
        assert_eq!(sol.path.len(), 1);
        assert!(close(&sol.averaged, &[1.0 / 3.0, -1.0 / 3.0, 0.0], 1e-14));
    }

    #[test]
    fn ascending_rejects_infeasible_start() {
        let c = full_constraint_cone(2).unwrap();
        // rows (1,0,0),(1,1,1): null direction (0,1,-1) violates a row either way
        let e = mle_jump_cone_ascending(&c, &[1.0, 0.0, 1.0], &[8.0, 5.0, 6.0], Some(&[0, 3])).unwrap_err();
        assert_eq!(e, Error::StartNotFeasible);
    }

    #[test]
    fn descending_matches_naive_and_never_increases() {
        let c = full_constraint_cone(3).unwrap();
        let (x, s) = ([1.0, 0.1, 0.8, 0.4], [20.0, 9.0, 11.0, 10.5]);
        let a = mle_jump_cone_naive(&c, &x, &s).unwrap();
        let d = mle_jump_cone_descending(&c, &x, &s).unwrap();
        assert!((a.per_time_loglik - d.per_time_loglik).abs() < 1e-12);
        assert!(d.path.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn descending_without_additions_when_relaxed_optimum_is_feasible() {
        let c = ConstraintCone::orthant(3).unwrap();
        let sol = mle_jump_cone_descending(&c, &[1.0, 0.3, 0.9], &[6.0, 2.0, 3.0]).unwrap();
        assert_eq!(sol.path.len(), 1);
    }

    #[test]
    fn unbounded_edge_is_degenerate_for_every_solver() {
        let c = full_constraint_cone(2).unwrap();
        let (x, s) = ([1.0, 0.0, 0.5], [4.0, 1.0, 4.0]);
        let err = Error::DegenerateRiskSet { time: None };
        assert_eq!(mle_jump_cone_naive(&c, &x, &s).unwrap_err(), err);
        assert_eq!(mle_jump_cone_ascending(&c, &x, &s, None).unwrap_err(), err);
        assert_eq!(mle_jump_cone_descending(&c, &x, &s).unwrap_err(), err);
    }

    #[test]
    fn combinations_enumerate_lexicographically() {
        let all: Vec<Vec<usize>> = Combinations::new(4, 2).collect();
        assert_eq!(all, [vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }
}
