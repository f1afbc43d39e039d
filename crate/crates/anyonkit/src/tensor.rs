//! Truncated tensor products and q-Clebsch-Gordan coefficients.

use crate::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::liealg::{AlgebraName, AlgebraSpec, Weight};
use crate::linalg::{self, Mat};
use crate::qarith::{ComplexValue, QContext};
use crate::repmod::{build_irrep, gram_schmidt, IrrepModule};

/// Steps of the continuation path from q = 1 used to fix gauge signs.
const PATH_STEPS: usize = 12;
const PATH_PRECISION: u32 = 96;
const PATH_TOLERANCE: f64 = 1e-12;

/// Full index of one coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CGKey {
    pub j1: Weight,
    pub j2: Weight,
    pub j: Weight,
    pub alpha: usize,
    pub m1: Weight,
    pub mu1: usize,
    pub m2: Weight,
    pub mu2: usize,
    pub m: Weight,
    pub mu: usize,
}

/// Product states `|s1⟩⊗|s2⟩` of a fixed total weight.
#[derive(Clone, Debug)]
pub struct PairSpace {
    pub pairs: Vec<(usize, usize)>,
    index: HashMap<(usize, usize), usize>,
}

impl PairSpace {
    pub fn new(m1: &IrrepModule, m2: &IrrepModule, j: &Weight) -> Self {
        let mut pairs = Vec::new();
        for s1 in 0..m1.dim() {
            let need = j.sub(&m1.weight_of(s1));
            for &s2 in m2.states_of_weight(&need) {
                pairs.push((s1, s2));
            }
        }
        let index = pairs.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        PairSpace { pairs, index }
    }

    pub fn position(&self, p: &(usize, usize)) -> Option<usize> {
        self.index.get(p).copied()
    }
}

/// Memoized `q^{n/D}`.
pub(crate) struct PowCache<'a> {
    ctx: &'a QContext,
    map: HashMap<i64, ComplexValue>,
}

impl<'a> PowCache<'a> {
    pub(crate) fn new(ctx: &'a QContext) -> Self {
        PowCache {
            ctx,
            map: HashMap::default(),
        }
    }

    pub(crate) fn get(&mut self, n: i64) -> &ComplexValue {
        let ctx = self.ctx;
        self.map.entry(n).or_insert_with(|| ctx.q_power(n))
    }
}

/// Numerator (in units of 1/D) of `q_i^{h/4}`.
fn quarter_exponent(alg: &AlgebraSpec, i: usize, h: i32) -> i64 {
    let d = alg.root_denominator as i64;
    let den = 4 * alg.t[i] as i64;
    debug_assert_eq!(d % den, 0);
    d / den * h as i64
}

/// Applies `Δ(X_i) = X_i ⊗ q_i^{H_i/4} + q_i^{-H_i/4} ⊗ X_i` to a dense product vector.
pub(crate) fn coproduct_apply(
    alg: &AlgebraSpec,
    pc: &mut PowCache,
    m1: &IrrepModule,
    m2: &IrrepModule,
    i: usize,
    raising: bool,
    v: &[ComplexValue],
) -> Vec<ComplexValue> {
    let d2 = m2.dim();
    let prec = pc.ctx.precision_bits;
    let mut out = vec![ComplexValue::zero(prec); v.len()];
    let (ops1, ops2) = if raising {
        (&m1.raise[i], &m2.raise[i])
    } else {
        (&m1.lower[i], &m2.lower[i])
    };
    for s1 in 0..m1.dim() {
        for s2 in 0..d2 {
            let c = &v[s1 * d2 + s2];
            if c.re.is_zero() && c.im.is_zero() {
                continue;
            }
            if !ops1[s1].is_empty() {
                let ph = pc
                    .get(quarter_exponent(alg, i, m2.weight_of(s2).l[i]))
                    .clone();
                let cph = c * &ph;
                for (t1, x) in &ops1[s1] {
                    out[t1 * d2 + s2].add_mul(&cph, x);
                }
            }
            if !ops2[s2].is_empty() {
                let ph = pc
                    .get(-quarter_exponent(alg, i, m1.weight_of(s1).l[i]))
                    .clone();
                let cph = c * &ph;
                for (t2, x) in &ops2[s2] {
                    out[s1 * d2 + t2].add_mul(&cph, x);
                }
            }
        }
    }
    out
}

/// Candidate highest-weight vectors of one weight, before truncation.
#[derive(Clone, Debug)]
pub(crate) struct RawChannel {
    pub vec: Vec<ComplexValue>,
    pub norm: ComplexValue,
    pub eps: Option<i8>,
}

#[derive(Clone, Debug)]
pub(crate) struct RawSolutions {
    pub space: PairSpace,
    pub channels: Vec<RawChannel>,
    pub dimension: usize,
    pub fallback: bool,
}

fn bilinear_norm(v: &[ComplexValue], prec: u32) -> ComplexValue {
    ComplexValue::dot(prec, v.iter().zip(v))
}

/// Solves `Δ(L^+_i) v = 0` on the weight-`j` product subspace and picks the
/// multiplicity basis.
pub(crate) fn raw_channels(
    ctx: &QContext,
    alg: &AlgebraSpec,
    m1: &IrrepModule,
    m2: &IrrepModule,
    j: &Weight,
) -> Result<RawSolutions> {
    let prec = ctx.precision_bits;
    let tol = ctx.tolerance;
    let space = PairSpace::new(m1, m2, j);
    let n = space.pairs.len();
    let d2 = m2.dim();
    let mut pc = PowCache::new(ctx);
    // rows indexed by target product state per generator
    let mut rows: Mat = Vec::new();
    for i in 0..alg.rank {
        let mut row_of: HashMap<usize, usize> = HashMap::default();
        let mut block: Mat = Vec::new();
        for (c, &(s1, s2)) in space.pairs.iter().enumerate() {
            let mut e = vec![ComplexValue::zero(prec); m1.dim() * d2];
            e[s1 * d2 + s2] = ctx.one();
            let img = coproduct_apply(alg, &mut pc, m1, m2, i, true, &e);
            for (t, x) in img.iter().enumerate() {
                if x.re.is_zero() && x.im.is_zero() {
                    continue;
                }
                let r = *row_of.entry(t).or_insert_with(|| {
                    block.push(vec![ComplexValue::zero(prec); n]);
                    block.len() - 1
                });
                block[r][c] = x.clone();
            }
        }
        rows.extend(block);
    }
    let null = linalg::null_space(&rows, n, prec, tol);
    let dimension = null.len();
    let mut fallback = false;
    let mut channels = Vec::new();
    if dimension == 1 {
        let norm = bilinear_norm(&null[0], prec);
        channels.push(RawChannel {
            vec: null[0].clone(),
            norm,
            eps: None,
        });
    } else if dimension == 2 && m1.hw == m2.hw {
        let tops: Vec<HashMap<(usize, usize), ComplexValue>> = null
            .iter()
            .map(|v| space.pairs.iter().cloned().zip(v.iter().cloned()).collect())
            .collect();
        let (r, _, _) = braiding_matrix(ctx, alg, m1, m2, j, &tops, &tops)?;
        let (lams, us) = linalg::eigen2_left(&r).ok_or_else(|| {
            Error::SolutionSpace(format!("degenerate braiding on {}⊗{}→{j}", m1.hw, m2.hw))
        })?;
        let (xn, xd) = symmetric_exponent(alg, &m1.hw, j);
        let base = ctx.q_power_frac(xn, xd);
        for (lam, u) in lams.iter().zip(us.iter()) {
            let mut v = vec![ComplexValue::zero(prec); n];
            for (a, ua) in u.iter().enumerate() {
                for (x, y) in v.iter_mut().zip(&null[a]) {
                    x.add_mul(ua, y);
                }
            }
            let ratio = lam / &base;
            let eps = if ratio.approx_eq(&ctx.one(), 1e-6) {
                Some(1)
            } else if ratio.approx_eq(&(-ctx.one()), 1e-6) {
                Some(-1)
            } else {
                None
            };
            let norm = bilinear_norm(&v, prec);
            channels.push(RawChannel { vec: v, norm, eps });
        }
    } else if dimension >= 2 {
        fallback = true;
        let mut g = linalg::zeros(prec, dimension, dimension);
        for a in 0..dimension {
            for b in 0..dimension {
                g[a][b] = ComplexValue::dot(prec, null[a].iter().zip(&null[b]));
            }
        }
        let t = gram_schmidt(&g, prec, tol, dimension);
        for row in t {
            let mut v = vec![ComplexValue::zero(prec); n];
            for (a, ca) in row.iter().enumerate() {
                for (x, y) in v.iter_mut().zip(&null[a]) {
                    x.add_mul(ca, y);
                }
            }
            channels.push(RawChannel {
                vec: v,
                norm: ctx.one(),
                eps: None,
            });
        }
    }
    Ok(RawSolutions {
        space,
        channels,
        dimension,
        fallback,
    })
}

/// Exponent `h(j)/2 - h(a)` of the braiding eigenvalue on `a ⊗ a → j`, as a fraction.
fn symmetric_exponent(alg: &AlgebraSpec, a: &Weight, j: &Weight) -> (i64, i64) {
    (
        alg.casimir_scaled(j) - 2 * alg.casimir_scaled(a),
        4 * alg.qf_den,
    )
}

/// Braiding matrix `R_{αβ}` in `σR v^{ab}_α = Σ_β R_{αβ} v^{ba}_β`, read off
/// from the top components at the lowest left weight.
/// Returns the matrix, the lowest weight used and the fit residual.
pub fn braiding_matrix(
    ctx: &QContext,
    alg: &AlgebraSpec,
    ma: &IrrepModule,
    mb: &IrrepModule,
    j: &Weight,
    left: &[HashMap<(usize, usize), ComplexValue>],
    right: &[HashMap<(usize, usize), ComplexValue>],
) -> Result<(Mat, Weight, f64)> {
    let prec = ctx.precision_bits;
    let tol = ctx.tolerance;
    let n = left.len();
    let what = || format!("{}⊗{}→{j}", ma.hw, mb.hw);
    if right.len() != n || n == 0 {
        return Err(Error::NoMinimalWeight(what()));
    }
    let mut support: Vec<Weight> = Vec::new();
    for s in 0..ma.dim() {
        let w = ma.weight_of(s);
        if support.contains(&w) {
            continue;
        }
        let hit = left
            .iter()
            .any(|v| v.iter().any(|(&(sa, _), c)| sa == s && c.abs_f64() > tol));
        if hit {
            support.push(w);
        }
    }
    let minimal: Vec<Weight> = support
        .iter()
        .filter(|w| !support.iter().any(|v| alg.strictly_above(w, v)))
        .cloned()
        .collect();
    for m in minimal.iter().rev() {
        let rest = j.sub(m);
        let mut cols = Vec::new();
        for &y in ma.states_of_weight(m) {
            for &x in mb.states_of_weight(&rest) {
                cols.push((y, x));
            }
        }
        let zero = ComplexValue::zero(prec);
        let e = ctx.q_power_frac(alg.ip_scaled(m, &rest), 2 * alg.qf_den);
        let bt: Mat = cols
            .iter()
            .map(|&(y, x)| {
                (0..n)
                    .map(|b| right[b].get(&(x, y)).unwrap_or(&zero).clone())
                    .collect()
            })
            .collect();
        let at: Mat = cols
            .iter()
            .map(|&(y, x)| {
                (0..n)
                    .map(|a| &e * left[a].get(&(y, x)).unwrap_or(&zero))
                    .collect()
            })
            .collect();
        if let Some((rt, res)) = linalg::solve_consistent(&bt, &at, tol) {
            return Ok((linalg::transpose(&rt), *m, res));
        }
    }
    Err(Error::NoMinimalWeight(what()))
}

/// Per-channel gauge bookkeeping.
#[derive(Clone, Debug)]
pub struct GaugeRecord {
    /// Anchor coefficient `(m1, μ1, m2, μ2)` at the top state, positive as q → 1.
    pub anchor: (Weight, usize, Weight, usize),
    /// Sign of the braiding eigenvalue relative to `q^{h_j/2-h_a}` when the channel
    /// comes from a multiplicity-two symmetric product.
    pub symmetry: Option<i8>,
    /// Lowest probed level at which the channel is present.
    pub threshold: Option<u32>,
    /// Multiplicity basis came from plain Gram-Schmidt order.
    pub fallback_order: bool,
    /// Largest mismatch among redundant descent equations.
    pub descent_residual: f64,
}

#[derive(Clone, Debug)]
pub struct HwSolution {
    pub space: PairSpace,
    pub vec: Vec<ComplexValue>,
    pub gauge: GaugeRecord,
}

#[derive(Clone, Debug)]
pub struct Channel {
    pub j: Weight,
    pub alpha: usize,
    pub module: Arc<IrrepModule>,
    /// `states[s]` lists `(s1, s2, C)` for state `s` of the target module.
    pub states: Vec<Vec<(u16, u16, ComplexValue)>>,
    pub gauge: GaugeRecord,
}

impl Channel {
    pub fn state_map(&self, s: usize) -> HashMap<(usize, usize), ComplexValue> {
        self.states[s]
            .iter()
            .map(|(a, b, c)| ((*a as usize, *b as usize), c.clone()))
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct CGTable {
    pub j1: Weight,
    pub j2: Weight,
    pub mod1: Arc<IrrepModule>,
    pub mod2: Arc<IrrepModule>,
    pub channels: Vec<Channel>,
    /// Classical summands removed by truncation, with their classical multiplicity.
    pub truncated: Vec<(Weight, usize)>,
}

impl CGTable {
    pub fn fusion(&self, j: &Weight) -> usize {
        self.channels.iter().filter(|c| c.j == *j).count()
    }

    pub fn channel(&self, j: &Weight, alpha: usize) -> Option<&Channel> {
        self.channels.iter().find(|c| c.j == *j && c.alpha == alpha)
    }

    pub fn outcomes(&self) -> Vec<Weight> {
        let mut v: Vec<Weight> = Vec::new();
        for c in &self.channels {
            if !v.contains(&c.j) {
                v.push(c.j);
            }
        }
        v
    }

    /// Coefficient for a full key; `None` means an exact zero.
    pub fn get(&self, key: &CGKey) -> Option<&ComplexValue> {
        let ch = self.channel(&key.j, key.alpha)?;
        let s = ch.module.index_of(&key.m, key.mu)?;
        let s1 = self.mod1.index_of(&key.m1, key.mu1)? as u16;
        let s2 = self.mod2.index_of(&key.m2, key.mu2)? as u16;
        ch.states[s]
            .iter()
            .find(|(a, b, _)| *a == s1 && *b == s2)
            .map(|x| &x.2)
    }

    pub fn coeff(
        &self,
        j: &Weight,
        alpha: usize,
        m1: (Weight, usize),
        m2: (Weight, usize),
        m: (Weight, usize),
    ) -> Option<&ComplexValue> {
        self.get(&CGKey {
            j1: self.j1,
            j2: self.j2,
            j: *j,
            alpha,
            m1: m1.0,
            mu1: m1.1,
            m2: m2.0,
            mu2: m2.1,
            m: m.0,
            mu: m.1,
        })
    }

    /// All stored coefficients with their keys.
    pub fn entries(&self) -> Vec<(CGKey, ComplexValue)> {
        let mut out = Vec::new();
        for ch in &self.channels {
            for (s, list) in ch.states.iter().enumerate() {
                let st = ch.module.states[s];
                for (a, b, c) in list {
                    let s1 = self.mod1.states[*a as usize];
                    let s2 = self.mod2.states[*b as usize];
                    out.push((
                        CGKey {
                            j1: self.j1,
                            j2: self.j2,
                            j: ch.j,
                            alpha: ch.alpha,
                            m1: s1.weight,
                            mu1: s1.mult_index,
                            m2: s2.weight,
                            mu2: s2.mult_index,
                            m: st.weight,
                            mu: st.mult_index,
                        },
                        c.clone(),
                    ));
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum CtxKey {
    Target,
    Path(usize),
    Probe(u32),
}

/// Caching front end for modules, highest-weight solutions and CG tables.
pub struct CgEngine {
    pub alg: AlgebraSpec,
    pub ctx: QContext,
    /// Level used for truncation; kept when the engine is moved to `1/q`.
    pub level: Option<u32>,
    inverted: bool,
    path: Vec<QContext>,
    modules: Mutex<HashMap<(CtxKey, Weight), Arc<IrrepModule>>>,
    tables: Mutex<HashMap<(Weight, Weight), Arc<CGTable>>>,
}

impl CgEngine {
    pub fn new(alg: AlgebraSpec, ctx: QContext) -> Self {
        let low = ctx.with_precision(PATH_PRECISION, PATH_TOLERANCE);
        let path = (0..=PATH_STEPS)
            .map(|n| low.scaled(n as f64 / PATH_STEPS as f64))
            .collect();
        let level = ctx.level();
        CgEngine {
            alg,
            ctx,
            level,
            inverted: false,
            path,
            modules: Mutex::new(HashMap::default()),
            tables: Mutex::new(HashMap::default()),
        }
    }

    /// Same theory evaluated at `1/q`.
    pub fn inverse(&self) -> CgEngine {
        let mut e = CgEngine::new(self.alg.clone(), self.ctx.inverse());
        e.level = self.level;
        e.inverted = !self.inverted;
        e
    }

    fn context(&self, key: CtxKey) -> QContext {
        match key {
            CtxKey::Target => self.ctx.clone(),
            CtxKey::Path(n) => self.path[n].clone(),
            CtxKey::Probe(k) => {
                let c = QContext::root_of_unity(
                    k,
                    self.alg.dual_coxeter,
                    self.alg.root_denominator,
                    self.ctx.precision_bits,
                )
                .with_tolerance(self.ctx.tolerance);
                if self.inverted {
                    c.inverse()
                } else {
                    c
                }
            }
        }
    }

    fn module_at(&self, key: CtxKey, hw: &Weight) -> Result<Arc<IrrepModule>> {
        if let Some(m) = self.modules.lock().unwrap().get(&(key, *hw)) {
            return Ok(m.clone());
        }
        let m = Arc::new(build_irrep(&self.context(key), &self.alg, hw)?);
        self.modules.lock().unwrap().insert((key, *hw), m.clone());
        Ok(m)
    }

    pub fn module(&self, hw: &Weight) -> Result<Arc<IrrepModule>> {
        self.module_at(CtxKey::Target, hw)
    }

    /// Surviving normalized highest-weight vectors of weight `j` in `j1 ⊗ j2`,
    /// ordered and gauge fixed.
    pub fn highest_weight_solutions(
        &self,
        j1: &Weight,
        j2: &Weight,
        j: &Weight,
    ) -> Result<Vec<HwSolution>> {
        let ctx = &self.ctx;
        let prec = ctx.precision_bits;
        let m1 = self.module(j1)?;
        let m2 = self.module(j2)?;
        let raw = raw_channels(ctx, &self.alg, &m1, &m2, j)?;
        let classical = self
            .alg
            .classical_tensor_product(j1, j2)
            .into_iter()
            .find(|(w, _)| w == j)
            .map(|x| x.1)
            .unwrap_or(0);
        if raw.dimension != classical {
            return Err(Error::SolutionSpace(format!(
                "{j1}⊗{j2}→{j}: {} solutions, classical multiplicity {classical}",
                raw.dimension
            )));
        }
        // summands outside the level are dropped whole, null-norm ones individually
        if let Some(k) = self.level {
            if !self.alg.is_admissible(j, k) {
                return Ok(Vec::new());
            }
        }
        let mut surv: Vec<(RawChannel, Option<u32>)> = raw
            .channels
            .iter()
            .filter(|c| c.norm.abs_f64() > ctx.tolerance)
            .map(|c| (c.clone(), None))
            .collect();
        if surv.len() > 1 && surv.iter().all(|c| c.0.eps.is_some()) {
            if let Some(level) = self.level {
                for kp in (1..level).rev() {
                    if !self.alg.is_admissible(j1, kp) || !self.alg.is_admissible(j2, kp) {
                        break;
                    }
                    let p1 = self.module_at(CtxKey::Probe(kp), j1)?;
                    let p2 = self.module_at(CtxKey::Probe(kp), j2)?;
                    let pr =
                        raw_channels(&self.context(CtxKey::Probe(kp)), &self.alg, &p1, &p2, j)?;
                    for s in surv.iter_mut() {
                        let present = pr
                            .channels
                            .iter()
                            .any(|c| c.eps == s.0.eps && c.norm.abs_f64() > ctx.tolerance);
                        if present {
                            s.1 = Some(kp);
                        }
                    }
                }
                for s in surv.iter_mut() {
                    if s.1.is_none() {
                        s.1 = Some(level);
                    }
                }
            }
            surv.sort_by(|a, b| a.1.cmp(&b.1).then(b.0.eps.cmp(&a.0.eps)));
        }
        let mut out = Vec::new();
        for (idx, (ch, threshold)) in surv.iter().enumerate() {
            let inv = ch.norm.sqrt().recip();
            let mut vec: Vec<ComplexValue> = ch.vec.iter().map(|x| x * &inv).collect();
            let (anchor_pos, flip) =
                self.continuation_sign(j1, j2, j, idx, ch.eps, raw.fallback, &vec)?;
            if flip {
                vec = vec.iter().map(|x| -x).collect();
            }
            let (s1, s2) = raw.space.pairs[anchor_pos];
            let anchor = (
                m1.weight_of(s1),
                m1.states[s1].mult_index,
                m2.weight_of(s2),
                m2.states[s2].mult_index,
            );
            let _ = prec;
            out.push(HwSolution {
                space: raw.space.clone(),
                vec,
                gauge: GaugeRecord {
                    anchor,
                    symmetry: ch.eps,
                    threshold: *threshold,
                    fallback_order: raw.fallback,
                    descent_residual: 0.0,
                },
            });
        }
        Ok(out)
    }

    /// Follows the channel from q = 1 to the target along `q^s`, `s ∈ [0,1]`,
    /// keeping the vector continuous. Returns the anchor position and whether
    /// the target vector must flip sign.
    #[allow(clippy::too_many_arguments)]
    fn continuation_sign(
        &self,
        j1: &Weight,
        j2: &Weight,
        j: &Weight,
        idx: usize,
        eps: Option<i8>,
        fallback: bool,
        target: &[ComplexValue],
    ) -> Result<(usize, bool)> {
        let mut prev: Option<Vec<(f64, f64)>> = None;
        let mut anchor = 0;
        for n in 0..=PATH_STEPS {
            let key = CtxKey::Path(n);
            let pctx = self.context(key);
            let p1 = self.module_at(key, j1)?;
            let p2 = self.module_at(key, j2)?;
            let raw = raw_channels(&pctx, &self.alg, &p1, &p2, j)?;
            let ch = if let Some(e) = eps {
                raw.channels.iter().find(|c| c.eps == Some(e))
            } else if fallback {
                raw.channels.get(idx)
            } else {
                raw.channels.first()
            }
            .ok_or_else(|| {
                Error::SolutionSpace(format!("{j1}⊗{j2}→{j} lost along continuation"))
            })?;
            let inv = ch.norm.sqrt().recip();
            let mut v: Vec<(f64, f64)> = ch.vec.iter().map(|x| (x * &inv).to_c64()).collect();
            let flip = match &prev {
                None => {
                    anchor = v
                        .iter()
                        .position(|c| (c.0 * c.0 + c.1 * c.1).sqrt() > 1e-8)
                        .ok_or_else(|| Error::SolutionSpace("null classical vector".into()))?;
                    v[anchor].0 < 0.0
                }
                Some(p) => hermitian_overlap(p, &v) < 0.0,
            };
            if flip {
                for c in v.iter_mut() {
                    *c = (-c.0, -c.1);
                }
            }
            prev = Some(v);
        }
        let last = prev.unwrap();
        let t: Vec<(f64, f64)> = target.iter().map(|x| x.to_c64()).collect();
        Ok((anchor, hermitian_overlap(&last, &t) < 0.0))
    }

    /// Complete CG table of `j1 ⊗ j2`.
    pub fn cg_table(&self, j1: &Weight, j2: &Weight) -> Result<Arc<CGTable>> {
        if let Some(t) = self.tables.lock().unwrap().get(&(*j1, *j2)) {
            return Ok(t.clone());
        }
        let mod1 = self.module(j1)?;
        let mod2 = self.module(j2)?;
        let mut channels = Vec::new();
        let mut truncated = Vec::new();
        for (j, cm) in self.alg.classical_tensor_product(j1, j2) {
            let sols = self.highest_weight_solutions(j1, j2, &j)?;
            if sols.len() < cm {
                truncated.push((j, cm - sols.len()));
            }
            if sols.is_empty() {
                continue;
            }
            let modj = self.module(&j).map_err(|e| {
                Error::SolutionSpace(format!(
                    "{j1}⊗{j2}: surviving channel {j} has no module ({e})"
                ))
            })?;
            for (alpha, sol) in sols.into_iter().enumerate() {
                let (states, residual) = self.descend(&mod1, &mod2, &modj, &sol)?;
                let mut gauge = sol.gauge;
                gauge.descent_residual = residual;
                channels.push(Channel {
                    j,
                    alpha,
                    module: modj.clone(),
                    states,
                    gauge,
                });
            }
        }
        let table = Arc::new(CGTable {
            j1: *j1,
            j2: *j2,
            mod1,
            mod2,
            channels,
            truncated,
        });
        self.tables
            .lock()
            .unwrap()
            .insert((*j1, *j2), table.clone());
        Ok(table)
    }

    /// Fills every state of the target module by applying `Δ(L^-_i)`.
    fn descend(
        &self,
        mod1: &IrrepModule,
        mod2: &IrrepModule,
        modj: &IrrepModule,
        sol: &HwSolution,
    ) -> Result<(Vec<Vec<(u16, u16, ComplexValue)>>, f64)> {
        let ctx = &self.ctx;
        let prec = ctx.precision_bits;
        let d2 = mod2.dim();
        let full = mod1.dim() * d2;
        let mut pc = PowCache::new(ctx);
        let mut vecs: Vec<Option<Vec<ComplexValue>>> = vec![None; modj.dim()];
        let mut top = vec![ComplexValue::zero(prec); full];
        for (p, c) in sol.space.pairs.iter().zip(&sol.vec) {
            top[p.0 * d2 + p.1] = c.clone();
        }
        vecs[0] = Some(top);
        let mut residual = 0.0f64;
        let mut s = 1;
        while s < modj.dim() {
            let w = modj.weight_of(s);
            let unknowns = modj.states_of_weight(&w).to_vec();
            let mut a: Mat = Vec::new();
            let mut b: Mat = Vec::new();
            for i in 0..self.alg.rank {
                let up = w.add(&self.alg.simple_root(i));
                for &p in modj.states_of_weight(&up) {
                    let row: Vec<ComplexValue> = unknowns
                        .iter()
                        .map(|&u| {
                            modj.lower_elem(i, u, p)
                                .cloned()
                                .unwrap_or_else(|| ctx.zero())
                        })
                        .collect();
                    if row.iter().all(|x| x.abs_f64() <= ctx.tolerance) {
                        continue;
                    }
                    let src = vecs[p].as_ref().expect("higher weights are filled first");
                    b.push(coproduct_apply(
                        &self.alg, &mut pc, mod1, mod2, i, false, src,
                    ));
                    a.push(row);
                }
            }
            let (x, res) =
                linalg::solve_consistent(&a, &b, ctx.tolerance).ok_or_else(|| Error::NullNorm {
                    module: modj.label(),
                    weight: w.to_string(),
                })?;
            residual = residual.max(res);
            for (k, &u) in unknowns.iter().enumerate() {
                vecs[u] = Some(x[k].clone());
            }
            s += unknowns.len();
        }
        let mut out = Vec::with_capacity(modj.dim());
        for (sidx, v) in vecs.into_iter().enumerate() {
            let v = v.expect("all states filled");
            let w = modj.weight_of(sidx);
            let mut list = Vec::new();
            for (idx, c) in v.into_iter().enumerate() {
                let (s1, s2) = (idx / d2, idx % d2);
                if mod1.weight_of(s1).add(&mod2.weight_of(s2)) != w {
                    continue;
                }
                if c.abs_f64() > ctx.tolerance {
                    list.push((s1 as u16, s2 as u16, c));
                }
            }
            out.push(list);
        }
        Ok((out, residual))
    }
}

fn hermitian_overlap(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.0 * y.0 + x.1 * y.1).sum()
}

/// Orthogonality and equivariance residuals of a table.
#[derive(Clone, Debug, Default)]
pub struct TableReport {
    pub orthogonality: f64,
    pub completeness: f64,
    pub equivariance: f64,
    pub descent: f64,
}

pub fn verify_table(ctx: &QContext, alg: &AlgebraSpec, table: &CGTable) -> TableReport {
    let prec = ctx.precision_bits;
    let mut rep = TableReport::default();
    let d2 = table.mod2.dim();
    // orthogonality between all (channel, state) pairs of equal weight
    let mut all: Vec<(Weight, HashMap<(usize, usize), ComplexValue>)> = Vec::new();
    for ch in &table.channels {
        rep.descent = rep.descent.max(ch.gauge.descent_residual);
        for s in 0..ch.module.dim() {
            all.push((ch.module.weight_of(s), ch.state_map(s)));
        }
    }
    for a in 0..all.len() {
        for b in a..all.len() {
            if all[a].0 != all[b].0 {
                continue;
            }
            let mut acc = ComplexValue::zero(prec);
            for (k, x) in &all[a].1 {
                if let Some(y) = all[b].1.get(k) {
                    acc.add_mul(x, y);
                }
            }
            if a == b {
                acc -= &ComplexValue::one(prec);
            }
            rep.orthogonality = rep.orthogonality.max(acc.abs_f64());
        }
    }
    // completeness over product states when nothing was truncated
    if table.truncated.is_empty() {
        let mut gram: HashMap<((usize, usize), (usize, usize)), ComplexValue> = HashMap::default();
        for (_, v) in &all {
            for (k1, x) in v {
                for (k2, y) in v {
                    gram.entry((*k1, *k2))
                        .or_insert_with(|| ComplexValue::zero(prec))
                        .add_mul(x, y);
                }
            }
        }
        for ((k1, k2), v) in gram {
            let target = if k1 == k2 {
                ComplexValue::one(prec)
            } else {
                ComplexValue::zero(prec)
            };
            rep.completeness = rep.completeness.max((&v - &target).abs_f64());
        }
    }
    // equivariance: Δ(X) C_s = Σ_t X_{ts} C_t
    let mut pc = PowCache::new(ctx);
    for ch in &table.channels {
        let dense: Vec<Vec<ComplexValue>> = (0..ch.module.dim())
            .map(|s| {
                let mut v = vec![ComplexValue::zero(prec); table.mod1.dim() * d2];
                for (a, b, c) in &ch.states[s] {
                    v[*a as usize * d2 + *b as usize] = c.clone();
                }
                v
            })
            .collect();
        for i in 0..alg.rank {
            for raising in [true, false] {
                let ops = if raising {
                    &ch.module.raise[i]
                } else {
                    &ch.module.lower[i]
                };
                for s in 0..ch.module.dim() {
                    let lhs = coproduct_apply(
                        alg,
                        &mut pc,
                        &table.mod1,
                        &table.mod2,
                        i,
                        raising,
                        &dense[s],
                    );
                    let mut rhs = vec![ComplexValue::zero(prec); lhs.len()];
                    for (t, x) in &ops[s] {
                        for (r, y) in rhs.iter_mut().zip(&dense[*t]) {
                            r.add_mul(x, y);
                        }
                    }
                    for (x, y) in lhs.iter().zip(&rhs) {
                        rep.equivariance = rep.equivariance.max((x - y).abs_f64());
                    }
                }
            }
        }
    }
    rep
}

/// Sign attached to a state under conjugation: the antisymmetric zero-weight
/// state of the su(3) adjoint changes sign.
pub fn conjugation_sign(alg: &AlgebraSpec, module: &IrrepModule, s: usize) -> i32 {
    let st = module.states[s];
    if alg.name == AlgebraName::A2
        && module.hw.l == [1, 1]
        && st.weight.is_zero()
        && st.mult_index == 1
    {
        -1
    } else {
        1
    }
}

/// Whether conjugation maps the weight basis of `module` onto that of its
/// conjugate up to the sign rule above.
pub fn conjugation_compatible(alg: &AlgebraSpec, module: &IrrepModule) -> bool {
    (alg.name == AlgebraName::A2 && module.hw.l == [1, 1])
        || module.states.iter().all(|s| s.mult_index == 0)
}

/// Fitted sign exponents and residuals of the three CG symmetry relations for one channel.
/// The lowest-weight and conjugation relations are skipped (`None`) when a module
/// has a weight space of dimension > 1 other than the adjoint zero weight.
#[derive(Clone, Debug)]
pub struct SymmetryFit {
    pub j: Weight,
    pub alpha: usize,
    pub s1: u8,
    pub s2: Option<u8>,
    pub s3: Option<u8>,
    /// Residuals of the swap, lowest-weight and conjugation relations.
    pub residuals: [f64; 3],
    pub residual: f64,
}

fn fit_sign(pairs: &[(ComplexValue, ComplexValue)]) -> (u8, f64) {
    let mut best = (0u8, f64::INFINITY);
    for s in 0..2u8 {
        let mut worst = 0.0f64;
        for (a, b) in pairs {
            let r = if s == 0 { a - b } else { a + b };
            worst = worst.max(r.abs_f64());
        }
        if worst < best.1 {
            best = (s, worst);
        }
    }
    best
}

/// Checks the swap, lowest-weight and conjugation relations.
///
/// `table` and `swapped` (`j2 ⊗ j1`) and `conj` (`j̄1 ⊗ j̄2`) live at q;
/// `table_inv` is `j1 ⊗ j2` evaluated at `1/q`.
pub fn check_cg_symmetries(
    alg: &AlgebraSpec,
    table: &CGTable,
    table_inv: &CGTable,
    swapped: &CGTable,
    conj: &CGTable,
) -> Vec<SymmetryFit> {
    let zero = ComplexValue::zero(64);
    let mut out = Vec::new();
    for ch in &table.channels {
        let mut swap_pairs = Vec::new();
        let mut low_pairs = Vec::new();
        let mut bar_pairs = Vec::new();
        let jbar = alg.conjugate_weight(&ch.j);
        let compatible = conjugation_compatible(alg, &table.mod1)
            && conjugation_compatible(alg, &table.mod2)
            && conjugation_compatible(alg, &ch.module);
        for s in 0..ch.module.dim() {
            let st = ch.module.states[s];
            for s1 in 0..table.mod1.dim() {
                for s2 in 0..table.mod2.dim() {
                    let a = table.mod1.states[s1];
                    let b = table.mod2.states[s2];
                    if a.weight.add(&b.weight) != st.weight {
                        continue;
                    }
                    let m1 = (a.weight, a.mult_index);
                    let m2 = (b.weight, b.mult_index);
                    let m = (st.weight, st.mult_index);
                    let base = table
                        .coeff(&ch.j, ch.alpha, m1, m2, m)
                        .unwrap_or(&zero)
                        .clone();
                    let inv = table_inv
                        .coeff(&ch.j, ch.alpha, m1, m2, m)
                        .unwrap_or(&zero)
                        .clone();
                    let sw = swapped
                        .coeff(&ch.j, ch.alpha, m2, m1, m)
                        .unwrap_or(&zero)
                        .clone();
                    swap_pairs.push((sw, inv.clone()));
                    if !compatible {
                        continue;
                    }
                    let sign = conjugation_sign(alg, &table.mod1, s1)
                        * conjugation_sign(alg, &table.mod2, s2)
                        * conjugation_sign(alg, &ch.module, s);
                    let signed_inv = if sign < 0 { -&inv } else { inv };
                    let signed_base = if sign < 0 { -&base } else { base };
                    let nm1 = (alg.neg_conjugate(&m1.0), m1.1);
                    let nm2 = (alg.neg_conjugate(&m2.0), m2.1);
                    let nm = (alg.neg_conjugate(&m.0), m.1);
                    let low = table
                        .coeff(&ch.j, ch.alpha, nm1, nm2, nm)
                        .unwrap_or(&zero)
                        .clone();
                    low_pairs.push((low, signed_inv));
                    let b1 = (alg.conjugate_weight(&m1.0), m1.1);
                    let b2 = (alg.conjugate_weight(&m2.0), m2.1);
                    let bm = (alg.conjugate_weight(&m.0), m.1);
                    let bar = conj
                        .coeff(&jbar, ch.alpha, b1, b2, bm)
                        .unwrap_or(&zero)
                        .clone();
                    bar_pairs.push((bar, signed_base));
                }
            }
        }
        let (s1, r1) = fit_sign(&swap_pairs);
        let (s2, r2, s3, r3) = if compatible {
            let (s2, r2) = fit_sign(&low_pairs);
            let (s3, r3) = fit_sign(&bar_pairs);
            (Some(s2), r2, Some(s3), r3)
        } else {
            (None, 0.0, None, 0.0)
        };
        out.push(SymmetryFit {
            j: ch.j,
            alpha: ch.alpha,
            s1,
            s2,
            s3,
            residuals: [r1, r2, r3],
            residual: r1.max(r2).max(r3),
        });
    }
    out
}
