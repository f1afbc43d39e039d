//! Irreducible modules of the quantum group in an orthonormal weight basis.

use crate::collections::HashMap;

use crate::error::{Error, Result};
use crate::liealg::{AlgebraName, AlgebraSpec, Weight};
use crate::linalg::{self, Mat};
use crate::qarith::{ComplexValue, QContext};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub weight: Weight,
    pub mult_index: usize,
}

/// Sparse column lists: `ops[i][s]` holds the nonzero components of `X_i |s⟩`.
pub type SparseOps = Vec<Vec<Vec<(usize, ComplexValue)>>>;

#[derive(Clone, Debug)]
pub struct IrrepModule {
    pub algebra: AlgebraName,
    pub rank: usize,
    pub hw: Weight,
    pub states: Vec<BasisState>,
    pub lower: SparseOps,
    pub raise: SparseOps,
    index: HashMap<(Weight, usize), usize>,
    by_weight: HashMap<Weight, Vec<usize>>,
}

impl IrrepModule {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn index_of(&self, weight: &Weight, mult_index: usize) -> Option<usize> {
        self.index.get(&(*weight, mult_index)).copied()
    }

    pub fn states_of_weight(&self, weight: &Weight) -> &[usize] {
        self.by_weight
            .get(weight)
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    pub fn weight_of(&self, s: usize) -> Weight {
        self.states[s].weight
    }

    /// `⟨t| L^-_i |s⟩`, zero if absent.
    pub fn lower_elem(&self, i: usize, t: usize, s: usize) -> Option<&ComplexValue> {
        self.lower[i][s]
            .iter()
            .find(|(r, _)| *r == t)
            .map(|(_, v)| v)
    }

    pub fn lower_matrix(&self, i: usize, prec: u32) -> Mat {
        dense(&self.lower[i], self.dim(), prec)
    }

    pub fn raise_matrix(&self, i: usize, prec: u32) -> Mat {
        dense(&self.raise[i], self.dim(), prec)
    }

    pub fn label(&self) -> String {
        format!("{}{}", self.algebra, self.hw)
    }
}

fn dense(ops: &[Vec<(usize, ComplexValue)>], n: usize, prec: u32) -> Mat {
    let mut m = linalg::zeros(prec, n, n);
    for (s, col) in ops.iter().enumerate() {
        for (t, v) in col {
            m[*t][s] = v.clone();
        }
    }
    m
}

/// Explicit basis for the two-dimensional zero-weight space of the su(3) adjoint:
/// `(L1 L2 ± L2 L1)|hw⟩ / √(2([2]±1))`, in terms of the candidates
/// `L1|(2,-1)⟩, L2|(-1,2)⟩`.
fn adjoint_zero_weight_basis(ctx: &QContext) -> Result<Mat> {
    let two = ctx.q_number(2, 1)?;
    let one = ctx.one();
    let c2 = ctx.int(2);
    let plus = (&c2 * &(&two + &one)).sqrt().recip();
    let minus = (&c2 * &(&two - &one)).sqrt().recip();
    Ok(vec![vec![plus.clone(), plus], vec![minus.clone(), -minus]])
}

/// Builds the irreducible module with highest weight `hw`.
pub fn build_irrep(ctx: &QContext, alg: &AlgebraSpec, hw: &Weight) -> Result<IrrepModule> {
    if !hw.is_dominant() {
        return Err(Error::InvalidInput(format!("{hw} is not dominant")));
    }
    if let Some(k) = ctx.level() {
        if !alg.is_admissible(hw, k) {
            return Err(Error::InvalidInput(format!(
                "{hw} is not admissible at level {k}"
            )));
        }
    }
    let prec = ctx.precision_bits;
    let tol = ctx.tolerance;
    let r = alg.rank;
    let ws = alg.classical_weight_system(hw);
    let mut module = IrrepModule {
        algebra: alg.name,
        rank: r,
        hw: *hw,
        states: Vec::new(),
        lower: vec![Vec::new(); r],
        raise: vec![Vec::new(); r],
        index: HashMap::default(),
        by_weight: HashMap::default(),
    };
    let push_state = |m: &mut IrrepModule, w: Weight, mu: usize| -> usize {
        let s = m.states.len();
        m.states.push(BasisState {
            weight: w,
            mult_index: mu,
        });
        m.index.insert((w, mu), s);
        m.by_weight.entry(w).or_default().push(s);
        for i in 0..r {
            m.lower[i].push(Vec::new());
            m.raise[i].push(Vec::new());
        }
        s
    };
    push_state(&mut module, *hw, 0);

    for &(mu_w, mult) in ws.iter().skip(1) {
        let mut cands: Vec<(usize, usize)> = Vec::new();
        for i in 0..r {
            let up = mu_w.add(&alg.simple_root(i));
            for &b in module.states_of_weight(&up) {
                cands.push((i, b));
            }
        }
        let n = cands.len();
        // Gram matrix of the candidates L^-_i |b⟩.
        let mut g = linalg::zeros(prec, n, n);
        for (x, &(i, b)) in cands.iter().enumerate() {
            for (y, &(j, bp)) in cands.iter().enumerate() {
                if y < x {
                    g[x][y] = g[y][x].clone();
                    continue;
                }
                let mut val = ctx.zero();
                if i == j && b == bp {
                    let h = module.states[bp].weight.l[i] as i64;
                    val = ctx.q_number_signed(h, alg.t[i]);
                }
                // ⟨b| L^-_j L^+_i |b'⟩
                for (xs, cx) in &module.raise[i][bp] {
                    if let Some(v) = module.lower_elem(j, b, *xs) {
                        val.add_mul(cx, v);
                    }
                }
                g[x][y] = val;
            }
        }
        let t: Mat = if alg.name == AlgebraName::A2 && hw.l == [1, 1] && mu_w.is_zero() {
            if cands.len() != 2 || cands[0].0 != 0 || cands[1].0 != 1 {
                return Err(Error::SolutionSpace(
                    "adjoint zero-weight candidates".into(),
                ));
            }
            adjoint_zero_weight_basis(ctx)?
        } else {
            gram_schmidt(&g, prec, tol, mult)
        };
        if t.len() < mult {
            return Err(Error::NullNorm {
                module: format!("{}{}", alg.name, hw),
                weight: mu_w.to_string(),
            });
        }
        let new: Vec<usize> = (0..mult)
            .map(|k| push_state(&mut module, mu_w, k))
            .collect();
        for (c, &(i, b)) in cands.iter().enumerate() {
            for (k, &s) in new.iter().enumerate() {
                let mut v = ctx.zero();
                for a in 0..n {
                    v.add_mul(&t[k][a], &g[a][c]);
                }
                if v.abs_f64() > tol {
                    module.lower[i][b].push((s, v.clone()));
                    module.raise[i][s].push((b, v));
                }
            }
        }
    }
    if ctx.level().is_some() || matches!(ctx.mode, crate::qarith::QMode::RealReference { .. }) {
        let dim = alg.weyl_dimension(hw) as usize;
        if module.dim() != dim {
            return Err(Error::SolutionSpace(format!(
                "dimension {} != {}",
                module.dim(),
                dim
            )));
        }
    }
    Ok(module)
}

/// Bilinear Gram-Schmidt over candidate vectors with Gram matrix `g`.
/// Returns up to `want` rows of coefficients.
pub(crate) fn gram_schmidt(g: &Mat, prec: u32, tol: f64, want: usize) -> Mat {
    let n = g.len();
    let mut t: Mat = Vec::new();
    for c in 0..n {
        if t.len() == want {
            break;
        }
        let mut u = vec![ComplexValue::zero(prec); n];
        u[c] = ComplexValue::one(prec);
        for e in &t {
            let mut p = ComplexValue::zero(prec);
            for a in 0..n {
                p.add_mul(&e[a], &g[a][c]);
            }
            for a in 0..n {
                let d = &p * &e[a];
                u[a] -= &d;
            }
        }
        let mut norm = ComplexValue::zero(prec);
        for a in 0..n {
            for b in 0..n {
                if u[a].abs_f64() == 0.0 || u[b].abs_f64() == 0.0 {
                    continue;
                }
                let x = &u[a] * &g[a][b];
                norm.add_mul(&x, &u[b]);
            }
        }
        if norm.abs_f64() <= tol {
            continue;
        }
        let inv = norm.sqrt().recip();
        t.push(u.iter().map(|x| x * &inv).collect());
    }
    t
}

/// Residuals of the defining relations of a module.
#[derive(Clone, Debug, Default)]
pub struct ModuleReport {
    pub cartan_commutator: f64,
    pub raise_lower_commutator: f64,
    pub serre: f64,
    pub weight_map: f64,
    pub orthonormal: f64,
}

impl ModuleReport {
    pub fn max(&self) -> f64 {
        self.cartan_commutator
            .max(self.raise_lower_commutator)
            .max(self.serre)
            .max(self.weight_map)
            .max(self.orthonormal)
    }
}

fn sub(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u - v).collect())
        .collect()
}

fn scale(a: &Mat, f: &ComplexValue) -> Mat {
    a.iter()
        .map(|x| x.iter().map(|u| u * f).collect())
        .collect()
}

fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect())
        .collect()
}

fn max_abs(a: &Mat) -> f64 {
    a.iter().flatten().map(|x| x.abs_f64()).fold(0.0, f64::max)
}

/// Checks commutators, Serre relations, weight bookkeeping and the
/// compatibility `L^+ = (L^-)^T` that encodes orthonormality.
pub fn verify_module(ctx: &QContext, alg: &AlgebraSpec, m: &IrrepModule) -> Result<ModuleReport> {
    let prec = ctx.precision_bits;
    let n = m.dim();
    let r = alg.rank;
    let lm: Vec<Mat> = (0..r).map(|i| m.lower_matrix(i, prec)).collect();
    let lp: Vec<Mat> = (0..r).map(|i| m.raise_matrix(i, prec)).collect();
    let mut h: Vec<Mat> = Vec::new();
    let mut hq: Vec<Mat> = Vec::new();
    for i in 0..r {
        let mut d = linalg::zeros(prec, n, n);
        let mut dq = linalg::zeros(prec, n, n);
        for s in 0..n {
            let x = m.states[s].weight.l[i] as i64;
            d[s][s] = ctx.int(x);
            dq[s][s] = ctx.q_number_signed(x, alg.t[i]);
        }
        h.push(d);
        hq.push(dq);
    }
    let mut rep = ModuleReport::default();
    for i in 0..r {
        for j in 0..r {
            let a = ctx.int(alg.root_shift(i, j) as i64);
            let c = sub(
                &linalg::matmul(&h[i], &lp[j]),
                &linalg::matmul(&lp[j], &h[i]),
            );
            rep.cartan_commutator = rep
                .cartan_commutator
                .max(max_abs(&sub(&c, &scale(&lp[j], &a))));
            let c = sub(
                &linalg::matmul(&h[i], &lm[j]),
                &linalg::matmul(&lm[j], &h[i]),
            );
            rep.cartan_commutator = rep
                .cartan_commutator
                .max(max_abs(&add(&c, &scale(&lm[j], &a))));
            let c = sub(
                &linalg::matmul(&lp[i], &lm[j]),
                &linalg::matmul(&lm[j], &lp[i]),
            );
            let target = if i == j {
                hq[i].clone()
            } else {
                linalg::zeros(prec, n, n)
            };
            rep.raise_lower_commutator = rep
                .raise_lower_commutator
                .max(linalg::max_diff(&c, &target));
            if i != j {
                let deg = (1 - alg.root_shift(i, j)) as i64;
                for ops in [&lp, &lm] {
                    let mut acc = linalg::zeros(prec, n, n);
                    for s in 0..=deg {
                        let mut coef = ctx.q_binomial(deg, s, alg.t[i])?;
                        if s % 2 == 1 {
                            coef = -coef;
                        }
                        let mut term = linalg::identity(prec, n);
                        for _ in 0..(deg - s) {
                            term = linalg::matmul(&term, &ops[i]);
                        }
                        term = linalg::matmul(&term, &ops[j]);
                        for _ in 0..s {
                            term = linalg::matmul(&term, &ops[i]);
                        }
                        acc = add(&acc, &scale(&term, &coef));
                    }
                    rep.serre = rep.serre.max(max_abs(&acc));
                }
            }
        }
        let a = alg.simple_root(i);
        for s in 0..n {
            for (t, v) in &m.lower[i][s] {
                if m.states[*t].weight != m.states[s].weight.sub(&a) {
                    rep.weight_map = rep.weight_map.max(v.abs_f64());
                }
            }
        }
        rep.orthonormal = rep
            .orthonormal
            .max(linalg::max_diff(&lp[i], &linalg::transpose(&lm[i])));
    }
    Ok(rep)
}
