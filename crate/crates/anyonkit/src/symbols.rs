//! F- and R-symbols from CG tables, with pentagon and hexagon checks.

use crate::collections::HashMap;

use crate::error::{Error, Result};
use crate::liealg::{AlgebraSpec, Weight};
use crate::linalg::{self, Mat};
use crate::qarith::ComplexValue;
use crate::tensor::{braiding_matrix, CgEngine};

/// Fusion coefficients restricted to a label set.
#[derive(Clone, Debug)]
pub struct FusionRules {
    pub labels: Vec<Weight>,
    pub n: HashMap<(Weight, Weight, Weight), usize>,
}

impl FusionRules {
    /// Reads the multiplicities off the CG tables of every label pair.
    pub fn from_engine(engine: &CgEngine, labels: &[Weight]) -> Result<Self> {
        let mut n = HashMap::default();
        for a in labels {
            for b in labels {
                let t = engine.cg_table(a, b)?;
                for c in labels {
                    let k = t.fusion(c);
                    if k > 0 {
                        n.insert((*a, *b, *c), k);
                    }
                }
            }
        }
        Ok(FusionRules {
            labels: labels.to_vec(),
            n,
        })
    }

    pub fn n(&self, a: &Weight, b: &Weight, c: &Weight) -> usize {
        self.n.get(&(*a, *b, *c)).copied().unwrap_or(0)
    }

    /// Outcomes of `a × b` in label order.
    pub fn outcomes(&self, a: &Weight, b: &Weight) -> Vec<Weight> {
        self.labels
            .iter()
            .filter(|c| self.n(a, b, c) > 0)
            .cloned()
            .collect()
    }

    pub fn vacuum(&self) -> Weight {
        self.labels[0]
    }

    pub fn dual(&self, a: &Weight) -> Weight {
        let v = self.vacuum();
        *self
            .labels
            .iter()
            .find(|b| self.n(a, b, &v) > 0)
            .expect("every label has a dual")
    }

    /// Pairs `(e, α, β)` with `α: (a,b→e)` and `β: (e,c→d)`.
    pub fn left_basis(
        &self,
        a: &Weight,
        b: &Weight,
        c: &Weight,
        d: &Weight,
    ) -> Vec<(Weight, usize, usize)> {
        let mut out = Vec::new();
        for e in &self.labels {
            for al in 0..self.n(a, b, e) {
                for be in 0..self.n(e, c, d) {
                    out.push((*e, al, be));
                }
            }
        }
        out
    }

    /// Pairs `(f, γ, δ)` with `γ: (b,c→f)` and `δ: (a,f→d)`.
    pub fn right_basis(
        &self,
        a: &Weight,
        b: &Weight,
        c: &Weight,
        d: &Weight,
    ) -> Vec<(Weight, usize, usize)> {
        let mut out = Vec::new();
        for f in &self.labels {
            for ga in 0..self.n(b, c, f) {
                for de in 0..self.n(a, f, d) {
                    out.push((*f, ga, de));
                }
            }
        }
        out
    }
}

pub type VertexPair = (Weight, usize, usize);

/// One block `F^{abc}_d` over composite indices.
#[derive(Clone, Debug)]
pub struct FBlock {
    pub labels: [Weight; 4],
    pub rows: Vec<VertexPair>,
    pub cols: Vec<VertexPair>,
    pub m: Mat,
    row_index: HashMap<VertexPair, usize>,
    col_index: HashMap<VertexPair, usize>,
}

impl FBlock {
    pub fn new(labels: [Weight; 4], rows: Vec<VertexPair>, cols: Vec<VertexPair>, m: Mat) -> Self {
        let row_index = rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let col_index = cols.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        FBlock {
            labels,
            rows,
            cols,
            m,
            row_index,
            col_index,
        }
    }

    pub fn get(&self, row: &VertexPair, col: &VertexPair) -> Option<&ComplexValue> {
        Some(&self.m[*self.row_index.get(row)?][*self.col_index.get(col)?])
    }

    /// Deviation of `F·Fᵀ` from the identity.
    pub fn orthogonality(&self) -> f64 {
        if self.rows.len() != self.cols.len() {
            return f64::INFINITY;
        }
        let prec = self.m[0][0].prec();
        let p = linalg::matmul(&self.m, &linalg::transpose(&self.m));
        linalg::max_diff(&p, &linalg::identity(prec, self.rows.len()))
    }
}

#[derive(Clone, Debug, Default)]
pub struct FTensor {
    pub blocks: HashMap<[Weight; 4], FBlock>,
}

impl FTensor {
    pub fn block(&self, a: &Weight, b: &Weight, c: &Weight, d: &Weight) -> Option<&FBlock> {
        self.blocks.get(&[*a, *b, *c, *d])
    }

    pub fn get(
        &self,
        abcd: [&Weight; 4],
        row: &VertexPair,
        col: &VertexPair,
    ) -> Option<&ComplexValue> {
        self.block(abcd[0], abcd[1], abcd[2], abcd[3])?
            .get(row, col)
    }
}

/// R-symbols, one value per fusion channel `(a, b, c, α)`.
#[derive(Clone, Debug, Default)]
pub struct RTensor {
    pub entries: HashMap<(Weight, Weight, Weight, usize), ComplexValue>,
    /// Largest off-diagonal braiding component seen.
    pub off_diagonal: f64,
    /// Largest residual of the lowest-weight fit.
    pub fit_residual: f64,
}

impl RTensor {
    pub fn get(&self, a: &Weight, b: &Weight, c: &Weight, alpha: usize) -> Option<&ComplexValue> {
        self.entries.get(&(*a, *b, *c, alpha))
    }
}

type Amplitudes = HashMap<(u16, u16, u16), ComplexValue>;

/// `F^{abc}_d` from the overlap of the two fusion trees at the top state of `d`.
pub fn compute_f(
    engine: &CgEngine,
    rules: &FusionRules,
    a: &Weight,
    b: &Weight,
    c: &Weight,
    d: &Weight,
) -> Result<FBlock> {
    let prec = engine.ctx.precision_bits;
    let rows = rules.left_basis(a, b, c, d);
    let cols = rules.right_basis(a, b, c, d);
    let missing = |x: &Weight, y: &Weight, z: &Weight, k: usize| {
        Error::MissingChannel(format!("{x}⊗{y}→{z} channel {k}"))
    };
    let t_ab = engine.cg_table(a, b)?;
    let t_bc = engine.cg_table(b, c)?;
    let mut left: Vec<Amplitudes> = Vec::new();
    for (e, al, be) in &rows {
        let ch1 = t_ab.channel(e, *al).ok_or_else(|| missing(a, b, e, *al))?;
        let t_ec = engine.cg_table(e, c)?;
        let ch2 = t_ec.channel(d, *be).ok_or_else(|| missing(e, c, d, *be))?;
        let mut amp: Amplitudes = HashMap::default();
        for (se, s3, c2) in &ch2.states[0] {
            for (s1, s2, c1) in &ch1.states[*se as usize] {
                amp.entry((*s1, *s2, *s3))
                    .or_insert_with(|| ComplexValue::zero(prec))
                    .add_mul(c1, c2);
            }
        }
        left.push(amp);
    }
    let mut m = linalg::zeros(prec, rows.len(), cols.len());
    for (ci, (f, ga, de)) in cols.iter().enumerate() {
        let ch3 = t_bc.channel(f, *ga).ok_or_else(|| missing(b, c, f, *ga))?;
        let t_af = engine.cg_table(a, f)?;
        let ch4 = t_af.channel(d, *de).ok_or_else(|| missing(a, f, d, *de))?;
        let mut amp: Amplitudes = HashMap::default();
        for (s1, sf, c4) in &ch4.states[0] {
            for (s2, s3, c3) in &ch3.states[*sf as usize] {
                amp.entry((*s1, *s2, *s3))
                    .or_insert_with(|| ComplexValue::zero(prec))
                    .add_mul(c3, c4);
            }
        }
        for (ri, l) in left.iter().enumerate() {
            let mut acc = ComplexValue::zero(prec);
            for (k, x) in &amp {
                if let Some(y) = l.get(k) {
                    acc.add_mul(x, y);
                }
            }
            m[ri][ci] = acc;
        }
    }
    Ok(FBlock::new([*a, *b, *c, *d], rows, cols, m))
}

/// All nonempty blocks over the label set.
pub fn compute_f_tensor(engine: &CgEngine, rules: &FusionRules) -> Result<FTensor> {
    let mut ft = FTensor::default();
    let l = &rules.labels;
    for a in l {
        for b in l {
            for c in l {
                for d in l {
                    if rules.left_basis(a, b, c, d).is_empty() {
                        continue;
                    }
                    ft.blocks
                        .insert([*a, *b, *c, *d], compute_f(engine, rules, a, b, c, d)?);
                }
            }
        }
    }
    Ok(ft)
}

/// Braiding `a ⊗ b → c` per fusion channel. Returns the full matrix (diagonal
/// expected) and the lowest-weight fit residual.
pub fn compute_r(engine: &CgEngine, a: &Weight, b: &Weight, c: &Weight) -> Result<(Mat, f64)> {
    let t_ab = engine.cg_table(a, b)?;
    let t_ba = engine.cg_table(b, a)?;
    let tops = |t: &crate::tensor::CGTable| -> Vec<HashMap<(usize, usize), ComplexValue>> {
        t.channels
            .iter()
            .filter(|ch| ch.j == *c)
            .map(|ch| ch.state_map(0))
            .collect()
    };
    let (r, _, res) = braiding_matrix(
        &engine.ctx,
        &engine.alg,
        &t_ab.mod1,
        &t_ab.mod2,
        c,
        &tops(&t_ab),
        &tops(&t_ba),
    )?;
    Ok((r, res))
}

pub fn compute_r_tensor(engine: &CgEngine, rules: &FusionRules) -> Result<RTensor> {
    let mut rt = RTensor::default();
    for a in &rules.labels {
        for b in &rules.labels {
            for c in rules.outcomes(a, b) {
                let (r, res) = compute_r(engine, a, b, &c)?;
                rt.fit_residual = rt.fit_residual.max(res);
                for (i, row) in r.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        if i == j {
                            rt.entries.insert((*a, *b, c, i), x.clone());
                        } else {
                            rt.off_diagonal = rt.off_diagonal.max(x.abs_f64());
                        }
                    }
                }
            }
        }
    }
    Ok(rt)
}

/// Largest residual of a check and the instance where it occurs.
#[derive(Clone, Debug, Default)]
pub struct Residual {
    pub max: f64,
    pub worst: String,
    pub instances: usize,
}

impl Residual {
    pub fn record(&mut self, r: f64, what: impl FnOnce() -> String) {
        self.instances += 1;
        if r > self.max || self.worst.is_empty() {
            self.max = r;
            self.worst = what();
        }
    }
}

fn fget<'a>(
    f: &'a FTensor,
    abcd: [&Weight; 4],
    row: VertexPair,
    col: VertexPair,
) -> Option<&'a ComplexValue> {
    f.get(abcd, &row, &col)
}

/// Multiplicity-labelled pentagon over every label and vertex assignment.
pub fn verify_pentagon(rules: &FusionRules, f: &FTensor, prec: u32) -> Residual {
    let mut res = Residual::default();
    let l = &rules.labels;
    for j1 in l {
        for j2 in l {
            for j3 in l {
                for j4 in l {
                    for j in l {
                        pentagon_at(rules, f, prec, [j1, j2, j3, j4, j], &mut res);
                    }
                }
            }
        }
    }
    res
}

fn pentagon_at(rules: &FusionRules, f: &FTensor, prec: u32, js: [&Weight; 5], res: &mut Residual) {
    let [j1, j2, j3, j4, j] = js;
    let l = &rules.labels;
    for j123 in l {
        let Some(b123) = f.block(j1, j2, j3, j123) else {
            continue;
        };
        for j234 in l {
            let Some(b234) = f.block(j2, j3, j4, j234) else {
                continue;
            };
            for &(j12, al, be) in &b123.rows {
                for ga in 0..rules.n(j123, j4, j) {
                    for &(j34, io, ka) in &b234.cols {
                        for et in 0..rules.n(j1, j234, j) {
                            let mut lhs = ComplexValue::zero(prec);
                            for &(j23, de, ep) in &b123.cols {
                                let Some(x) = b123.get(&(j12, al, be), &(j23, de, ep)) else {
                                    continue;
                                };
                                for ze in 0..rules.n(&j23, j4, j234) {
                                    let Some(y) = fget(
                                        f,
                                        [j1, &j23, j4, j],
                                        (*j123, ep, ga),
                                        (*j234, ze, et),
                                    ) else {
                                        continue;
                                    };
                                    let Some(z) = b234.get(&(j23, de, ze), &(j34, io, ka)) else {
                                        continue;
                                    };
                                    lhs.add_mul(&(x * y), z);
                                }
                            }
                            let mut rhs = ComplexValue::zero(prec);
                            for la in 0..rules.n(&j12, &j34, j) {
                                let Some(x) =
                                    fget(f, [&j12, j3, j4, j], (*j123, be, ga), (j34, io, la))
                                else {
                                    continue;
                                };
                                let Some(y) =
                                    fget(f, [j1, j2, &j34, j], (j12, al, la), (*j234, ka, et))
                                else {
                                    continue;
                                };
                                rhs.add_mul(x, y);
                            }
                            let r = (&lhs - &rhs).abs_f64();
                            res.record(r, || {
                                format!("j=({j1},{j2},{j3},{j4};{j}) j12={j12} j123={j123} j34={j34} j234={j234}")
                            });
                        }
                    }
                }
            }
        }
    }
}

/// Hexagon with `R`; with `inverse` every `R^{xy}_z` is replaced by `(R^{yx}_z)^{-1}`.
pub fn verify_hexagon(
    rules: &FusionRules,
    f: &FTensor,
    r: &RTensor,
    inverse: bool,
    prec: u32,
) -> Residual {
    let mut res = Residual::default();
    let l = &rules.labels;
    let rv = |x: &Weight, y: &Weight, z: &Weight, k: usize| -> Option<ComplexValue> {
        if inverse {
            r.get(y, x, z, k).map(|v| v.recip())
        } else {
            r.get(x, y, z, k).cloned()
        }
    };
    for j1 in l {
        for j2 in l {
            for j3 in l {
                for j in l {
                    let Some(lb) = f.block(j2, j1, j3, j) else {
                        continue;
                    };
                    for &(j12, al, be) in &lb.rows {
                        for &(j13, ga, de) in &lb.cols {
                            let (Some(ra), Some(rb)) = (rv(j1, j2, &j12, al), rv(j1, j3, &j13, ga))
                            else {
                                continue;
                            };
                            let lhs =
                                &(&ra * lb.get(&(j12, al, be), &(j13, ga, de)).unwrap()) * &rb;
                            let mut rhs = ComplexValue::zero(prec);
                            if let Some(b1) = f.block(j1, j2, j3, j) {
                                for &(j23, ep, ze) in &b1.cols {
                                    let Some(x) = b1.get(&(j12, al, be), &(j23, ep, ze)) else {
                                        continue;
                                    };
                                    let Some(y) = rv(j1, &j23, j, ze) else {
                                        continue;
                                    };
                                    let Some(z) =
                                        fget(f, [j2, j3, j1, j], (j23, ep, ze), (j13, ga, de))
                                    else {
                                        continue;
                                    };
                                    rhs.add_mul(&(x * &y), z);
                                }
                            }
                            let d = (&lhs - &rhs).abs_f64();
                            res.record(d, || format!("({j1},{j2},{j3};{j}) j12={j12} j13={j13}"));
                        }
                    }
                }
            }
        }
    }
    res
}

/// Residuals of `R^{ab}_c = R^{ba}_c` and `R^{ab}_c = R^{āb̄}_{c̄}`.
pub fn check_r_symmetries(
    alg: &AlgebraSpec,
    rules: &FusionRules,
    r: &RTensor,
) -> (Residual, Residual) {
    let mut swap = Residual::default();
    let mut conj = Residual::default();
    let bar = |w: &Weight| {
        if rules.labels.contains(&alg.conjugate_weight(w)) {
            alg.conjugate_weight(w)
        } else {
            rules.dual(w)
        }
    };
    for ((a, b, c, k), v) in &r.entries {
        if let Some(w) = r.get(b, a, c, *k) {
            swap.record((v - w).abs_f64(), || format!("R^({a},{b})_({c},{k})"));
        }
        if let Some(w) = r.get(&bar(a), &bar(b), &bar(c), *k) {
            conj.record((v - w).abs_f64(), || format!("R^({a},{b})_({c},{k})"));
        }
    }
    (swap, conj)
}
