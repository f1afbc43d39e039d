//! Topological data derived from F and R: dimensions, indicators, twists,
//! theta and tetrahedral symbols, central charge, fusion-ring matching.

use crate::collections::HashMap;

use rug::Float;

use crate::error::{Error, Result};
use crate::liealg::Weight;
use crate::qarith::ComplexValue;
use crate::symbols::{FTensor, FusionRules, RTensor, Residual};

#[derive(Clone, Debug)]
pub struct TqftData {
    /// Per label, in label order.
    pub dims: Vec<ComplexValue>,
    /// `D = sqrt(Σ d_a²)`.
    pub total_dim: ComplexValue,
    pub fb: Vec<ComplexValue>,
    pub twists: Vec<ComplexValue>,
    /// Indicator recomputed from twists, for self-dual labels.
    pub fb_from_twists: Vec<Option<ComplexValue>>,
    pub thetas: HashMap<(Weight, Weight, Weight), ComplexValue>,
    /// In `[0, 8)`.
    pub central_charge: f64,
    /// `|Σ d_a² θ_a| / D`, equal to 1 for a modular theory.
    pub gauss_modulus: f64,
}

fn vac(rules: &FusionRules) -> (Weight, usize, usize) {
    (rules.vacuum(), 0, 0)
}

/// `(F^{a ā a}_a)_{1,1}` for every label.
fn loop_entries(rules: &FusionRules, f: &FTensor) -> Result<Vec<ComplexValue>> {
    rules
        .labels
        .iter()
        .map(|a| {
            let ab = rules.dual(a);
            f.get([a, &ab, a, a], &vac(rules), &vac(rules))
                .cloned()
                .filter(|x| x.abs_f64() > 0.0)
                .ok_or_else(|| Error::InvalidInput(format!("vanishing loop F-symbol for {a}")))
        })
        .collect()
}

/// `d_a = 1/|(F^{aāa}_a)_{1,1}|`.
pub fn quantum_dims(rules: &FusionRules, f: &FTensor) -> Result<Vec<ComplexValue>> {
    Ok(loop_entries(rules, f)?
        .iter()
        .map(|x| ComplexValue::from_real(x.abs()).recip())
        .collect())
}

/// `fb_a = d_a (F^{aāa}_a)_{1,1}`.
pub fn frobenius_schur(
    rules: &FusionRules,
    f: &FTensor,
    dims: &[ComplexValue],
) -> Result<Vec<ComplexValue>> {
    Ok(loop_entries(rules, f)?
        .iter()
        .zip(dims)
        .map(|(x, d)| x * d)
        .collect())
}

/// `θ_a = fb_a (R^{ā a}_1)^*`.
pub fn twists(rules: &FusionRules, r: &RTensor, fb: &[ComplexValue]) -> Result<Vec<ComplexValue>> {
    let v = rules.vacuum();
    rules
        .labels
        .iter()
        .zip(fb)
        .map(|(a, s)| {
            let rv = r
                .get(&rules.dual(a), a, &v, 0)
                .ok_or_else(|| Error::MissingChannel(format!("R for {a} and its dual")))?;
            Ok(s * &rv.conj())
        })
        .collect()
}

/// `fb_c = D^{-2} Σ_{a,b} n_{ab}^c (θ_a/θ_b)² d_a d_b` for self-dual `c`.
pub fn fs_from_twists(
    rules: &FusionRules,
    dims: &[ComplexValue],
    twists: &[ComplexValue],
) -> Vec<Option<ComplexValue>> {
    let prec = dims[0].prec();
    let d2 = dims
        .iter()
        .fold(ComplexValue::zero(prec), |acc, d| &acc + &(d * d));
    rules
        .labels
        .iter()
        .map(|c| {
            if rules.dual(c) != *c {
                return None;
            }
            let mut acc = ComplexValue::zero(prec);
            for (i, a) in rules.labels.iter().enumerate() {
                for (j, b) in rules.labels.iter().enumerate() {
                    let n = rules.n(a, b, c);
                    if n == 0 {
                        continue;
                    }
                    let ratio = &twists[i] / &twists[j];
                    let term = &(&(&ratio * &ratio) * &dims[i]) * &dims[j];
                    acc += &(&term * &ComplexValue::from_int(prec, n as i64));
                }
            }
            Some(&acc / &d2)
        })
        .collect()
}

/// `ϑ(a,b,e) = (F^{a b b̄}_a)_{e,1} d_a d_b`, for multiplicity-free vertices.
pub fn theta_symbols(
    rules: &FusionRules,
    f: &FTensor,
    dims: &[ComplexValue],
) -> HashMap<(Weight, Weight, Weight), ComplexValue> {
    let mut out = HashMap::default();
    for (i, a) in rules.labels.iter().enumerate() {
        for (j, b) in rules.labels.iter().enumerate() {
            let bb = rules.dual(b);
            for e in rules.outcomes(a, b) {
                if rules.n(a, b, &e) != 1 || rules.n(&e, &bb, a) != 1 {
                    continue;
                }
                if let Some(x) = f.get([a, b, &bb, a], &(e, 0, 0), &vac(rules)) {
                    out.insert((*a, *b, e), &(x * &dims[i]) * &dims[j]);
                }
            }
        }
    }
    out
}

/// The generating relations `ϑ(a,b,e) = ϑ(ā,b̄,ē) = ϑ(b,a,e)` and
/// `ϑ(ē,b,ā) = fb_a fb_e ϑ(a,b,e)`; the indicator factor is 1 when every label
/// has `fb = 1`.
pub fn theta_symmetry_residual(
    rules: &FusionRules,
    fb: &[ComplexValue],
    thetas: &HashMap<(Weight, Weight, Weight), ComplexValue>,
) -> Residual {
    let mut res = Residual::default();
    let bar = |w: &Weight| rules.dual(w);
    let fb_of = |w: &Weight| &fb[rules.labels.iter().position(|x| x == w).expect("label")];
    for ((a, b, e), v) in thetas {
        let flip = fb_of(a) * fb_of(e);
        let images = [
            ((bar(a), bar(b), bar(e)), v.clone()),
            ((*b, *a, *e), v.clone()),
            ((bar(e), *b, bar(a)), v * &flip),
        ];
        for (img, want) in images {
            match thetas.get(&img) {
                Some(w) => res.record((&want - w).abs_f64(), || format!("ϑ({a},{b},{e})")),
                None => res.record(f64::INFINITY, || format!("ϑ({a},{b},{e}) image missing")),
            }
        }
    }
    res
}

/// Central charge mod 8 from the Gauss sum, and the modulus of the normalized sum.
pub fn central_charge(dims: &[ComplexValue], twists: &[ComplexValue]) -> (f64, f64) {
    let prec = dims[0].prec();
    let mut sum = ComplexValue::zero(prec);
    let mut d2 = ComplexValue::zero(prec);
    for (d, t) in dims.iter().zip(twists) {
        let dd = d * d;
        sum += &(&dd * t);
        d2 += &dd;
    }
    let g = &sum / &d2.sqrt();
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let c = (g.arg() * 4u32 / pi).to_f64();
    (c.rem_euclid(8.0), g.abs_f64())
}

/// Quantum-dimension multiplicativity `Σ_c n_{ab}^c d_c = d_a d_b`.
pub fn dimension_homomorphism_residual(rules: &FusionRules, dims: &[ComplexValue]) -> f64 {
    let prec = dims[0].prec();
    let mut worst = 0.0f64;
    for (i, a) in rules.labels.iter().enumerate() {
        for (j, b) in rules.labels.iter().enumerate() {
            let mut acc = ComplexValue::zero(prec);
            for (k, c) in rules.labels.iter().enumerate() {
                let n = rules.n(a, b, c) as i64;
                if n > 0 {
                    acc += &(&dims[k] * &ComplexValue::from_int(prec, n));
                }
            }
            worst = worst.max((&acc - &(&dims[i] * &dims[j])).abs_f64());
        }
    }
    worst
}

/// Inputs for tetrahedral symbols.
pub struct Tetrahedral<'a> {
    pub rules: &'a FusionRules,
    pub f: &'a FTensor,
    pub dims: &'a [ComplexValue],
    pub fb: &'a [ComplexValue],
    pub thetas: &'a HashMap<(Weight, Weight, Weight), ComplexValue>,
}

impl Tetrahedral<'_> {
    fn idx(&self, w: &Weight) -> usize {
        self.rules
            .labels
            .iter()
            .position(|x| x == w)
            .expect("label")
    }

    fn sgn(&self, a: &Weight, b: &Weight, c: &Weight) -> Option<ComplexValue> {
        let t = self.thetas.get(&(*a, *b, *c))?;
        Some(t / &ComplexValue::from_real(t.abs()))
    }

    /// `G(a,b,c,d,e,f) = sgn ϑ(a,d,f) sgn ϑ(b,c,f) fb_f (F^{abc}_d)_{e,f} sqrt(d_a d_b d_c d_d)`;
    /// `None` where the symbol is not defined without vertex labels.
    pub fn value(&self, l: [&Weight; 6]) -> Option<ComplexValue> {
        let [a, b, c, d, e, f] = l;
        let r = self.rules;
        let ones = [r.n(a, b, e), r.n(e, c, d), r.n(b, c, f), r.n(a, f, d)];
        if ones.iter().any(|&n| n != 1) {
            return None;
        }
        let x = self.f.get([a, b, c, d], &(*e, 0, 0), &(*f, 0, 0))?;
        let s = &self.sgn(a, d, f)? * &self.sgn(b, c, f)?;
        let prod = [a, b, c, d]
            .iter()
            .fold(ComplexValue::one(x.prec()), |acc, w| {
                &acc * &self.dims[self.idx(w)]
            });
        Some(&(&(&s * &self.fb[self.idx(f)]) * x) * &prod.sqrt())
    }

    /// Closure of `G` under its generating tetrahedral symmetries.
    pub fn symmetry_residual(&self) -> Residual {
        let mut res = Residual::default();
        let l = &self.rules.labels;
        let bar = |w: &Weight| self.rules.dual(w);
        for a in l {
            for b in l {
                for c in l {
                    for d in l {
                        for e in l {
                            for f in l {
                                let Some(v) = self.value([a, b, c, d, e, f]) else {
                                    continue;
                                };
                                let images = [
                                    [*d, bar(f), *b, *e, *a, bar(c)],
                                    [*e, *c, bar(f), *a, *d, bar(b)],
                                    [*c, bar(d), *a, bar(b), bar(e), bar(f)],
                                    [bar(c), bar(b), bar(a), bar(d), bar(f), bar(e)],
                                ];
                                for im in images {
                                    let [p, q, r, s, t, u] = &im;
                                    if let Some(w) = self.value([p, q, r, s, t, u]) {
                                        res.record((&v - &w).abs_f64(), || {
                                            format!("G({a},{b},{c},{d},{e},{f}) vs G({p},{q},{r},{s},{t},{u})")
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        res
    }
}

pub fn compute_tqft(rules: &FusionRules, f: &FTensor, r: &RTensor) -> Result<TqftData> {
    let dims = quantum_dims(rules, f)?;
    let fb = frobenius_schur(rules, f, &dims)?;
    let tw = twists(rules, r, &fb)?;
    let fb_from_twists = fs_from_twists(rules, &dims, &tw);
    let thetas = theta_symbols(rules, f, &dims);
    let (central_charge, gauss_modulus) = central_charge(&dims, &tw);
    let prec = dims[0].prec();
    let total_dim = dims
        .iter()
        .fold(ComplexValue::zero(prec), |acc, d| &acc + &(d * d))
        .sqrt();
    Ok(TqftData {
        dims,
        total_dim,
        fb,
        twists: tw,
        fb_from_twists,
        thetas,
        central_charge,
        gauss_modulus,
    })
}

/// Fusion coefficients over labels `0..n`, label 0 the vacuum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FusionRing {
    pub names: Vec<String>,
    pub n: Vec<Vec<Vec<u32>>>,
}

/// Brute-force bound on ring size.
pub const MAX_RING_LABELS: usize = 12;

impl FusionRing {
    pub fn from_rules(rules: &FusionRules) -> Self {
        let l = &rules.labels;
        let n = l
            .iter()
            .map(|a| {
                l.iter()
                    .map(|b| l.iter().map(|c| rules.n(a, b, c) as u32).collect())
                    .collect()
            })
            .collect();
        FusionRing {
            names: l.iter().map(|w| w.to_string()).collect(),
            n,
        }
    }

    pub fn new(names: Vec<String>, n: Vec<Vec<Vec<u32>>>) -> Self {
        FusionRing { names, n }
    }

    pub fn fibonacci() -> Self {
        let n = vec![vec![vec![1, 0], vec![0, 1]], vec![vec![0, 1], vec![1, 1]]];
        FusionRing::new(vec!["1".into(), "τ".into()], n)
    }

    /// su(2)_k ring from the level-k truncated Clebsch-Gordan rule.
    pub fn su2(k: i64) -> Self {
        let size = (k + 1) as usize;
        let mut n = vec![vec![vec![0; size]; size]; size];
        for a in 0..=k {
            for b in 0..=k {
                for c in crate::su2k::fusion_closed(k, a, b) {
                    n[a as usize][b as usize][c as usize] = 1;
                }
            }
        }
        FusionRing::new((0..=k).map(|a| a.to_string()).collect(), n)
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }
}

/// First vacuum-preserving bijection `π` with `n^A_{ab}^c = n^B_{π(a)π(b)}^{π(c)}`.
pub fn fusion_ring_equivalent(a: &FusionRing, b: &FusionRing) -> Result<Option<Vec<usize>>> {
    if a.len() > MAX_RING_LABELS || b.len() > MAX_RING_LABELS {
        return Err(Error::InvalidInput(format!(
            "rings above {MAX_RING_LABELS} labels are not searched"
        )));
    }
    if a.len() != b.len() || a.is_empty() {
        return Ok(None);
    }
    let n = a.len();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    perm[0] = 0;
    used[0] = true;
    fn consistent(a: &FusionRing, b: &FusionRing, perm: &[usize], upto: usize) -> bool {
        // check every triple involving the newest label and earlier ones
        for x in 0..=upto {
            for y in 0..=upto {
                for z in 0..=upto {
                    if x != upto && y != upto && z != upto {
                        continue;
                    }
                    if a.n[x][y][z] != b.n[perm[x]][perm[y]][perm[z]] {
                        return false;
                    }
                }
            }
        }
        true
    }
    fn search(
        a: &FusionRing,
        b: &FusionRing,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        k: usize,
    ) -> bool {
        if k == perm.len() {
            return true;
        }
        for t in 1..perm.len() {
            if used[t] {
                continue;
            }
            perm[k] = t;
            used[t] = true;
            if consistent(a, b, perm, k) && search(a, b, perm, used, k + 1) {
                return true;
            }
            used[t] = false;
        }
        perm[k] = usize::MAX;
        false
    }
    if !consistent(a, b, &perm, 0) {
        return Ok(None);
    }
    Ok(if search(a, b, &mut perm, &mut used, 1) {
        Some(perm)
    } else {
        None
    })
}
