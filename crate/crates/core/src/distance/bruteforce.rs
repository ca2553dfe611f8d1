//! Search oracle for alignment problems with every `k_i ≤ 2`.
//!
//! All factors but the last are enumerated over a grid of `O(k_i)` (both
//! components); for each grid point the last factor is optimal in closed form,
//! since the objective is affine in `Q_D` with Procrustes maximiser. The best
//! grid point is then polished by exact block-coordinate Procrustes sweeps.

use nalgebra::DMatrix;

use super::{alignment_objective, AlignmentProblem, Workspace};
use crate::error::{Error, Result};
use crate::linalg::{polar_factor, DenseMatrix, DenseTensor};

const MIN_ANGLES: usize = 360;

pub fn ls_distance_bruteforce_2d(p: &AlignmentProblem) -> Result<f64> {
    ls_distance_bruteforce_2d_with_grid(p, MIN_ANGLES)
}

pub fn ls_distance_bruteforce_2d_with_grid(p: &AlignmentProblem, angles: usize) -> Result<f64> {
    let ranks = p.ranks();
    if ranks.iter().any(|&k| k > 2) {
        return Err(Error::Unsupported(format!(
            "grid search needs every rank ≤ 2, got {ranks:?}"
        )));
    }
    if angles < MIN_ANGLES {
        return Err(Error::InvalidInput(format!(
            "grid needs at least {MIN_ANGLES} angles, got {angles}"
        )));
    }
    let ws = Workspace::new(p);
    let last = ranks.len() - 1;
    let grids: Vec<Vec<DenseMatrix>> = ranks[..last].iter().map(|&k| group_grid(k, angles)).collect();

    let mut search = Search {
        ws: &ws,
        grids: &grids,
        last,
        best_score: f64::NEG_INFINITY,
        best: Vec::new(),
        chosen: Vec::with_capacity(last),
    };
    search.descend_grid(p.candidate().core().clone(), 0.0);
    let mut q = search.best;
    q.push(DMatrix::identity(ranks[last], ranks[last]));
    q[last] = procrustes_block(&ws, &q, last)?;

    let mut f = alignment_objective(p, &q)?;
    for _ in 0..20_000 {
        for i in 0..ranks.len() {
            q[i] = procrustes_block(&ws, &q, i)?;
        }
        let next = alignment_objective(p, &q)?;
        let done = f - next <= 1e-14 * next + 1e-300;
        f = next.min(f);
        if done {
            break;
        }
    }
    Ok(f.max(0.0).sqrt())
}

/// Uniform grid on `O(k)` for `k ≤ 2`.
fn group_grid(k: usize, angles: usize) -> Vec<DenseMatrix> {
    if k == 1 {
        return vec![DMatrix::from_element(1, 1, 1.0), DMatrix::from_element(1, 1, -1.0)];
    }
    let mut out = Vec::with_capacity(2 * angles);
    for a in 0..angles {
        let t = std::f64::consts::TAU * a as f64 / angles as f64;
        let (s, c) = t.sin_cos();
        out.push(DMatrix::from_row_slice(2, 2, &[c, -s, s, c]));
        out.push(DMatrix::from_row_slice(2, 2, &[c, s, s, -c]));
    }
    out
}

/// `max_{Q ∈ O(k)} ⟨Q, M⟩`, the nuclear norm of `M`, for `k ≤ 2`.
fn best_inner(m: &DenseMatrix) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)].abs();
    }
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let rotation = ((a + d).powi(2) + (c - b).powi(2)).sqrt();
    let reflection = ((a - d).powi(2) + (b + c).powi(2)).sqrt();
    rotation.max(reflection)
}

/// Linear coefficient `M_i` with `f = const − 2⟨Q_i, M_i⟩` when the other factors are fixed.
fn linear_coefficient(ws: &Workspace<'_>, partial: &DenseTensor, mode: usize) -> DenseMatrix {
    let s0 = ws.p.reference().core();
    partial.unfold(mode).expect("mode in range") * s0.unfold(mode).expect("mode in range").transpose()
        + &ws.cross[mode]
}

fn procrustes_block(ws: &Workspace<'_>, q: &[DenseMatrix], mode: usize) -> Result<DenseMatrix> {
    let partial = ws.rotated_core(q, Some(mode));
    polar_factor(&linear_coefficient(ws, &partial, mode))
}

struct Search<'w, 'a> {
    ws: &'w Workspace<'a>,
    grids: &'w [Vec<DenseMatrix>],
    last: usize,
    best_score: f64,
    best: Vec<DenseMatrix>,
    chosen: Vec<DenseMatrix>,
}

impl Search<'_, '_> {
    /// Depth-first over grid factors; `score` accumulates `⟨U_iᵀU_i⁰, Q_i⟩` of chosen modes.
    fn descend_grid(&mut self, partial: DenseTensor, score: f64) {
        let depth = self.chosen.len();
        if depth == self.last {
            let total = score + best_inner(&linear_coefficient(self.ws, &partial, self.last));
            if total > self.best_score {
                self.best_score = total;
                self.best = self.chosen.clone();
            }
            return;
        }
        for q in &self.grids[depth] {
            let next = partial.mode_product(depth, &q.transpose()).expect("shapes match");
            let s = score + self.ws.cross[depth].dot(q);
            self.chosen.push(q.clone());
            self.descend_grid(next, s);
            self.chosen.pop();
        }
    }
}
