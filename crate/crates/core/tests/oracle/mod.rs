//! Independent reference computations for the estimator tests.
//!
//! Nothing here calls into the solvers under test: the brute-force cone
//! maximiser grids the cross-section `{b : s'b = 1, M b >= 0}`, and the
//! linear-program route solves small square systems for every vertex.
#![allow(dead_code)]

use addhaz_core::{Dataset, FitResult, SubjectRecord};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

pub fn below(rng: &mut ChaCha8Rng, n: usize) -> usize {
    (rng.next_u64() % n as u64) as usize
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting; `None` if (near) singular.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| {
        let mut row = r.clone();
        row.push(v);
        row
    }).collect();
    let scale = a.iter().flatten().fold(0.0f64, |acc, v| acc.max(v.abs()));
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() <= 1e-11 * scale {
            return None;
        }
        m.swap(col, piv);
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != col {
                let f = row[col] / pivot_row[col];
                for (v, pv) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *v -= f * pv;
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Full vertex constraint rows `(1, m)`, `m` in `{0,1}^p`.
pub fn vertex_rows(p: usize) -> Vec<Vec<f64>> {
    (0..1usize << p)
        .map(|mask| {
            let mut r = vec![1.0];
            r.extend((0..p).map(|j| (mask >> j & 1) as f64));
            r
        })
        .collect()
}

/// Maximum of `x'b` over `{b : s'b = 1, M b >= 0}` by enumerating the
/// vertices: every `p`-subset of rows solved together with `s'b = 1`.
/// `None` when no feasible vertex exists.
pub fn lp_vertex_max(rows: &[Vec<f64>], x: &[f64], s: &[f64]) -> Option<f64> {
    let n = x.len();
    let p = n - 1;
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..p).collect();
    loop {
        let mut a: Vec<Vec<f64>> = idx.iter().map(|&i| rows[i].clone()).collect();
        a.push(s.to_vec());
        let mut b = vec![0.0; p];
        b.push(1.0);
        if let Some(beta) = gauss_solve(&a, &b) {
            let feasible = rows.iter().all(|r| {
                let nr = dot(r, r).sqrt();
                dot(r, &beta) >= -1e-9 * nr * dot(&beta, &beta).sqrt()
            });
            if feasible {
                let v = dot(x, &beta);
                best = Some(best.map_or(v, |b: f64| b.max(v)));
            }
        }
        // next combination
        let mut i = p;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < rows.len() - p + i {
                idx[i] += 1;
                for j in (i + 1)..p {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
        if p == 0 {
            return best;
        }
    }
}

/// Brute-force maximiser of `log(x'b) - s'b` over `M b >= 0`, for `p` in
/// `{1, 2}`. Scaling along any ray is optimal at `s'b = 1`, so the search
/// runs over that cross-section, parametrised in polar coordinates around
/// `c = s / |s|^2` (which must be strictly feasible): a dense grid followed
/// by pattern-search refinement.
pub fn brute_force_cone_max(rows: &[Vec<f64>], x: &[f64], s: &[f64]) -> f64 {
    let n = x.len();
    assert!(n == 2 || n == 3, "brute force supports p in {{1, 2}}");
    let ss = dot(s, s);
    let c: Vec<f64> = s.iter().map(|v| v / ss).collect();
    assert!(rows.iter().all(|r| dot(r, &c) > 0.0), "centre must be strictly feasible");
    // orthonormal basis of the complement of s
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let mut v = e.clone();
        for b in std::iter::once(s.to_vec()).chain(basis.iter().cloned()) {
            let f = dot(&v, &b) / dot(&b, &b);
            for (vi, bi) in v.iter_mut().zip(&b) {
                *vi -= f * bi;
            }
        }
        let nv = dot(&v, &v).sqrt();
        if nv > 1e-8 {
            basis.push(v.iter().map(|vi| vi / nv).collect());
        }
        if basis.len() == n - 1 {
            break;
        }
    }
    let direction = |theta: f64| -> Vec<f64> {
        if n == 2 {
            let sign = if theta.rem_euclid(2.0 * std::f64::consts::PI) < std::f64::consts::PI { 1.0 } else { -1.0 };
            basis[0].iter().map(|b| sign * b).collect()
        } else {
            basis[0].iter().zip(&basis[1]).map(|(a, b)| theta.cos() * a + theta.sin() * b).collect()
        }
    };
    let reach = |d: &[f64]| -> f64 {
        rows.iter()
            .filter_map(|r| {
                let rd = dot(r, d);
                (rd < 0.0).then(|| dot(r, &c) / -rd)
            })
            .fold(f64::INFINITY, f64::min)
    };
    let objective = |theta: f64, u: f64| -> f64 {
        let d = direction(theta);
        // an excluded direction leaves the cross-section unbounded, but the
        // objective is flat along it
        let rho = reach(&d).min(1e3 / ss.sqrt());
        let beta: Vec<f64> = c.iter().zip(&d).map(|(ci, di)| ci + u * rho * di).collect();
        let h = dot(x, &beta);
        if h > 0.0 {
            h.ln() - dot(s, &beta)
        } else {
            f64::NEG_INFINITY
        }
    };
    let (thetas, us) = if n == 2 { (2, 2001) } else { (3600, 41) };
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..thetas {
        let theta = if n == 2 {
            (i as f64 + 0.5) * std::f64::consts::PI
        } else {
            2.0 * std::f64::consts::PI * i as f64 / thetas as f64
        };
        for k in 0..us {
            let u = k as f64 / (us - 1) as f64;
            let v = objective(theta, u);
            if v > best.0 {
                best = (v, theta, u);
            }
        }
    }
    let (mut val, mut theta, mut u) = best;
    let mut dt = if n == 2 { 0.0 } else { 2.0 * std::f64::consts::PI / thetas as f64 };
    let mut du = 1.0 / (us - 1) as f64;
    while du > 1e-15 || dt > 1e-15 {
        let mut moved = false;
        for (a, b) in [(dt, 0.0), (-dt, 0.0), (0.0, du), (0.0, -du), (dt, du), (-dt, du), (dt, -du), (-dt, -du)] {
            let (t2, u2) = (theta + a, (u + b).clamp(0.0, 1.0));
            let v = objective(t2, u2);
            if v > val {
                val = v;
                theta = t2;
                u = u2;
                moved = true;
            }
        }
        if !moved {
            dt /= 2.0;
            du /= 2.0;
        }
    }
    val
}

/// Random at-risk configuration: `m` subjects with covariates in `[0, 1]^p`
/// (a mix of continuous and binary columns), one of them failing. Returns
/// the failing subject's extended covariates and the risk sums.
pub fn random_risk_set(rng: &mut ChaCha8Rng, p: usize) -> (Vec<f64>, Vec<f64>) {
    let m = 2 + below(rng, 40);
    let binary: Vec<bool> = (0..p).map(|_| uniform(rng) < 0.3).collect();
    let subjects: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            let mut x = vec![1.0];
            for &b in &binary {
                let u = uniform(rng);
                x.push(if b { (u < 0.5) as u8 as f64 } else { u });
            }
            x
        })
        .collect();
    let failing = subjects[below(rng, m)].clone();
    let mut s = vec![0.0; p + 1];
    for x in &subjects {
        for (a, v) in s.iter_mut().zip(x) {
            *a += v;
        }
    }
    (failing, s)
}

/// Random pointed cone with `r` rows in `p + 1` dimensions and a risk-sum
/// vector `s`. With `bounded`, `s` is a strictly positive combination of
/// the rows, so the objective is bounded on the cone.
pub fn random_cone(rng: &mut ChaCha8Rng, p: usize, r: usize, bounded: bool) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let n = p + 1;
    let z: Vec<f64> = (0..n).map(|_| uniform(rng) * 2.0 - 1.0).collect();
    let rows: Vec<Vec<f64>> = (0..r)
        .map(|_| {
            let mut row: Vec<f64> = (0..n).map(|_| uniform(rng) * 2.0 - 1.0).collect();
            if dot(&row, &z) < 0.0 {
                row.iter_mut().for_each(|v| *v = -*v);
            }
            row
        })
        .collect();
    let s: Vec<f64> = if bounded {
        let mut s = vec![0.0; n];
        for row in &rows {
            let w = 0.1 + uniform(rng);
            for (a, v) in s.iter_mut().zip(row) {
                *a += w * v;
            }
        }
        s
    } else {
        (0..n).map(|_| uniform(rng) * 4.0 - 2.0).collect()
    };
    let mut x: Vec<f64> = (0..n).map(|_| uniform(rng) * 2.0 - 1.0).collect();
    x[0] = 1.0;
    (rows, x, s)
}

/// Right-censored dataset with one binary covariate.
pub fn random_binary_dataset(rng: &mut ChaCha8Rng, n: usize) -> Dataset {
    let records = (0..n)
        .map(|_| {
            let x = (uniform(rng) < 0.5) as u8 as f64;
            let t = -(1.0 - uniform(rng)).ln() / (0.5 + x);
            let c = 3.0 * uniform(rng);
            SubjectRecord::new(t.min(c), t <= c, vec![x])
        })
        .collect();
    Dataset::new(records, vec!["z".into()]).unwrap()
}

/// Checks the structural guarantees of a full-vertex-cone likelihood fit:
/// every vertex hazard jump is nonnegative, intercept jumps are nonnegative,
/// the cumulative baseline never decreases, and a jump with a single
/// optimal edge has at most two nonzero entries, summing to zero when two.
pub fn check_mle_fit(f: &FitResult) -> Result<(), String> {
    let p = f.p();
    let rows = vertex_rows(p);
    let mut baseline = 0.0;
    for (k, jump) in f.jumps().iter().enumerate() {
        let t = f.event_times()[k];
        for row in &rows {
            let h = dot(row, jump);
            if h < -1e-12 {
                return Err(format!("vertex hazard jump {h} at t={t}"));
            }
        }
        if jump[0] < 0.0 {
            return Err(format!("negative intercept jump at t={t}"));
        }
        let next = baseline + jump[0];
        if next < baseline {
            return Err(format!("baseline decreases at t={t}"));
        }
        baseline = next;
        if f.diagnostics[k].multiplicity == 1 {
            let nz: Vec<usize> = (0..=p).filter(|&j| jump[j] != 0.0).collect();
            let ok = nz.len() == 1
                || (nz.len() == 2 && nz[0] == 0 && (jump[0] + jump[nz[1]]).abs() <= 1e-15 * jump[0].abs());
            if !ok {
                return Err(format!("jump {jump:?} at t={t} is not an admissible edge point"));
            }
        }
    }
    Ok(())
}

pub fn assert_mle_fit_feasible(f: &FitResult) {
    if let Err(e) = check_mle_fit(f) {
        panic!("{e}");
    }
}
