//! Command-line front end and the serialized theory document.

use std::collections::BTreeMap;

use crate::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{AlgebraName, Weight};
use crate::linalg;
use crate::qarith::{default_tolerance, ComplexValue};
use crate::symbols::{
    verify_hexagon, verify_pentagon, FBlock, FTensor, FusionRules, RTensor, Residual,
};
use crate::theory::{is_validated, TheoryData, TheoryOptions, DEFAULT_PRECISION};
use crate::tqft::dimension_homomorphism_residual;

pub const SCHEMA_VERSION: &str = "1";
pub const PRECISION_ENV: &str = "ANYONKIT_PRECISION";

#[derive(Parser, Debug)]
#[command(
    name = "anyonkit",
    version,
    about = "Anyon data from quantum group Clebsch-Gordan coefficients"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Derive CG tables, F, R and TQFT data for an algebra at a level.
    Derive {
        /// A1|A2|B2|G2 (also su2, su3, so5, g2).
        algebra: String,
        /// Positive integer k; q = exp(2πi/(k+g)).
        level: u32,
        /// Working precision in bits.
        #[arg(long)]
        precision: Option<u32>,
        /// Zero threshold and pass bound for residuals.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep only the labels 1, 8, 10, 10̄ (su(3) at level 3).
        #[arg(long)]
        restrict_z3: bool,
    },
    /// Re-run the consistency checks on a saved document.
    Verify {
        /// A document written by `derive`.
        path: PathBuf,
    },
    /// Print tables from a saved document.
    Table {
        /// A document written by `derive`.
        path: PathBuf,
        #[arg(long, value_enum)]
        which: Which,
        /// cg: "J1 x J2 -> J"; F: "A B C D"; R: "A B"; labels as (a,b) or a.
        #[arg(long)]
        selector: Option<String>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Markdown,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Cg,
    #[value(name = "F", alias = "f")]
    F,
    #[value(name = "R", alias = "r")]
    R,
    Tqft,
}

/// A complex number as two decimal strings.
pub type Num = [String; 2];

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct TheoryDocument {
    pub schema_version: String,
    pub context: DocContext,
    pub labels: Vec<DocLabel>,
    pub total_dimension: Num,
    pub central_charge: String,
    pub gauss_modulus: String,
    pub fusion: DocFusion,
    #[serde(rename = "F")]
    pub f: DocF,
    #[serde(rename = "R")]
    pub r: DocR,
    pub cg: DocCg,
    pub gauge: DocGauge,
    pub verification: Vec<DocResidual>,
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DocContext {
    pub algebra: String,
    pub level: u32,
    /// q = exp(2πi · numerator/denominator).
    pub q_phase: QPhase,
    pub precision_bits: u32,
    pub tolerance: f64,
    pub restrict_z3: bool,
    pub validated: bool,
    pub modular: bool,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct QPhase {
    pub numerator: u32,
    pub denominator: u32,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DocLabel {
    pub name: String,
    pub weight: Vec<i32>,
    pub dual: String,
    pub dim: Num,
    pub twist: Num,
    pub fb: Num,
    pub fb_from_twists: Option<Num>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DocFusion {
    pub index_order: String,
    pub entries: Vec<(String, String, String, usize)>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DocF {
    pub index_order: String,
    pub blocks: Vec<DocFBlock>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DocFBlock {
    pub labels: [String; 4],
    pub rows: Vec<(String, usize, usize)>,
    pub cols: Vec<(String, usize, usize)>,
    /// Sparse `(row, col, value)`.
    pub entries: Vec<(usize, usize, Num)>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DocR {
    pub index_order: String,
    pub entries: Vec<(String, String, String, usize, Num)>,
    pub off_diagonal: f64,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DocCg {
    pub index_order: String,
    pub tables: Vec<DocCgTable>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DocCgTable {
    pub j1: String,
    pub j2: String,
    /// Module states as `(weight, multiplicity index)`.
    pub states1: Vec<(String, usize)>,
    pub states2: Vec<(String, usize)>,
    pub channels: Vec<DocChannel>,
    pub truncated: Vec<(String, usize)>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DocChannel {
    pub j: String,
    pub alpha: usize,
    pub anchor: (String, usize, String, usize),
    pub symmetry: Option<i8>,
    pub threshold: Option<u32>,
    pub fallback_order: bool,
    /// `(m1, μ1, m2, μ2, m, μ, value)`.
    pub entries: Vec<(String, usize, String, usize, String, usize, Num)>,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DocGauge {
    pub anchor_convention: String,
    pub multiplicity_basis: String,
    pub r_diagonal_assumed: bool,
    pub fallback_channels: usize,
}

#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct DocResidual {
    pub name: String,
    pub max: f64,
    pub worst: String,
}

/// Significant digits that round-trip a value at `prec` bits.
pub fn digits_for(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
}

fn num(v: &ComplexValue, digits: usize) -> Num {
    let (re, im) = v.to_decimal_strings(digits);
    [re, im]
}

fn parse_num(n: &Num, prec: u32) -> Result<ComplexValue> {
    ComplexValue::parse(prec, &n[0], &n[1])
        .ok_or_else(|| Error::Document(format!("bad number {n:?}")))
}

impl TheoryDocument {
    pub fn from_theory(t: &TheoryData) -> Result<Self> {
        let prec = t.precision();
        let dg = digits_for(prec);
        let tol = t.engine.ctx.tolerance;
        let name = |w: &Weight| w.to_string();
        let labels = t
            .labels()
            .iter()
            .enumerate()
            .map(|(i, w)| DocLabel {
                name: name(w),
                weight: w.labels().to_vec(),
                dual: name(&t.rules.dual(w)),
                dim: num(&t.tqft.dims[i], dg),
                twist: num(&t.tqft.twists[i], dg),
                fb: num(&t.tqft.fb[i], dg),
                fb_from_twists: t.tqft.fb_from_twists[i].as_ref().map(|x| num(x, dg)),
            })
            .collect();
        let mut fusion = Vec::new();
        for a in t.labels() {
            for b in t.labels() {
                for c in t.labels() {
                    let n = t.rules.n(a, b, c);
                    if n > 0 {
                        fusion.push((name(a), name(b), name(c), n));
                    }
                }
            }
        }
        let mut keys: Vec<&[Weight; 4]> = t.f.blocks.keys().collect();
        let order = |w: &Weight| t.index(w).unwrap_or(usize::MAX);
        keys.sort_by_key(|k| k.map(|w| order(&w)));
        let blocks = keys
            .into_iter()
            .map(|k| {
                let b = &t.f.blocks[k];
                let mut entries = Vec::new();
                for (i, row) in b.m.iter().enumerate() {
                    for (j, x) in row.iter().enumerate() {
                        if x.abs_f64() > tol {
                            entries.push((i, j, num(x, dg)));
                        }
                    }
                }
                DocFBlock {
                    labels: k.map(|w| name(&w)),
                    rows: b.rows.iter().map(|(e, a, c)| (name(e), *a, *c)).collect(),
                    cols: b.cols.iter().map(|(e, a, c)| (name(e), *a, *c)).collect(),
                    entries,
                }
            })
            .collect();
        let mut r_entries: Vec<_> = t.r.entries.iter().collect();
        r_entries.sort_by_key(|((a, b, c, k), _)| (order(a), order(b), order(c), *k));
        let r_entries = r_entries
            .into_iter()
            .map(|((a, b, c, k), v)| (name(a), name(b), name(c), *k, num(v, dg)))
            .collect();
        let mut tables = Vec::new();
        let mut fallback = 0;
        for a in t.labels() {
            for b in t.labels() {
                let tab = t.engine.cg_table(a, b)?;
                let st = |m: &crate::repmod::IrrepModule| -> Vec<(String, usize)> {
                    m.states
                        .iter()
                        .map(|s| (name(&s.weight), s.mult_index))
                        .collect()
                };
                let mut channels = Vec::new();
                for ch in &tab.channels {
                    if !t.labels().contains(&ch.j) {
                        continue;
                    }
                    fallback += ch.gauge.fallback_order as usize;
                    let mut entries = Vec::new();
                    for (s, list) in ch.states.iter().enumerate() {
                        let ms = ch.module.states[s];
                        for (s1, s2, c) in list {
                            let x = tab.mod1.states[*s1 as usize];
                            let y = tab.mod2.states[*s2 as usize];
                            entries.push((
                                name(&x.weight),
                                x.mult_index,
                                name(&y.weight),
                                y.mult_index,
                                name(&ms.weight),
                                ms.mult_index,
                                num(c, dg),
                            ));
                        }
                    }
                    let an = ch.gauge.anchor;
                    channels.push(DocChannel {
                        j: name(&ch.j),
                        alpha: ch.alpha,
                        anchor: (name(&an.0), an.1, name(&an.2), an.3),
                        symmetry: ch.gauge.symmetry,
                        threshold: ch.gauge.threshold,
                        fallback_order: ch.gauge.fallback_order,
                        entries,
                    });
                }
                tables.push(DocCgTable {
                    j1: name(a),
                    j2: name(b),
                    states1: st(&tab.mod1),
                    states2: st(&tab.mod2),
                    channels,
                    truncated: tab.truncated.iter().map(|(w, n)| (name(w), *n)).collect(),
                });
            }
        }
        let report = t.verify();
        let verification = report
            .entries()
            .into_iter()
            .filter(|(n, _, _)| t.modular() || *n != "fb_from_twists")
            .map(|(n, m, w)| DocResidual {
                name: n.to_string(),
                max: m,
                worst: w,
            })
            .collect();
        let mut warnings = Vec::new();
        let name_alg = t.alg.name;
        if !is_validated(name_alg, t.level, t.restrict_z3) {
            warnings.push(format!(
                "{name_alg} at level {} is outside the validated configurations",
                t.level
            ));
        }
        if !t.modular() {
            warnings.push("theory is not modular; central charge is advisory".into());
        }
        Ok(TheoryDocument {
            schema_version: SCHEMA_VERSION.into(),
            context: DocContext {
                algebra: name_alg.to_string(),
                level: t.level,
                q_phase: QPhase { numerator: 1, denominator: t.level + t.alg.dual_coxeter },
                precision_bits: prec,
                tolerance: tol,
                restrict_z3: t.restrict_z3,
                validated: is_validated(name_alg, t.level, t.restrict_z3),
                modular: t.modular(),
            },
            labels,
            total_dimension: num(&t.tqft.total_dim, dg),
            central_charge: format!("{:.15}", t.tqft.central_charge),
            gauss_modulus: format!("{:.15}", t.tqft.gauss_modulus),
            fusion: DocFusion { index_order: "(a, b, c, n_ab^c)".into(), entries: fusion },
            f: DocF {
                index_order: "F^{abc}_d rows (e, α: a b→e, β: e c→d), cols (f, γ: b c→f, δ: a f→d); labels in canonical order, multiplicity second".into(),
                blocks,
            },
            r: DocR {
                index_order: "(a, b, c, α): R^{ab}_c on channel α of a⊗b→c".into(),
                entries: r_entries,
                off_diagonal: t.r.off_diagonal,
            },
            cg: DocCg {
                index_order: "(m1, μ1, m2, μ2, m, μ, C): coefficient of |j1 m1 μ1⟩⊗|j2 m2 μ2⟩ in |j α m μ⟩".into(),
                tables,
            },
            gauge: DocGauge {
                anchor_convention: "top-state coefficient with largest m1 positive as q → 1, continued to the root of unity".into(),
                multiplicity_basis: "braiding eigenbasis for symmetric products, ordered by threshold level then symmetry sign; Gram-Schmidt order otherwise".into(),
                r_diagonal_assumed: true,
                fallback_channels: fallback,
            },
            verification,
            warnings,
        })
    }

    fn weight(&self, s: &str) -> Result<Weight> {
        let w = Weight::parse(s)?;
        let rank = self.labels.first().map(|l| l.weight.len()).unwrap_or(2);
        if w.labels().len() != rank {
            return Err(Error::InvalidInput(format!(
                "label '{s}' has the wrong rank"
            )));
        }
        Ok(w)
    }

    pub fn label_weights(&self) -> Result<Vec<Weight>> {
        self.labels
            .iter()
            .map(|l| Ok(Weight::new(&l.weight)))
            .collect()
    }

    pub fn rules(&self) -> Result<FusionRules> {
        let labels = self.label_weights()?;
        let mut n = HashMap::default();
        for (a, b, c, k) in &self.fusion.entries {
            n.insert((self.weight(a)?, self.weight(b)?, self.weight(c)?), *k);
        }
        Ok(FusionRules { labels, n })
    }

    pub fn f_tensor(&self) -> Result<FTensor> {
        let prec = self.context.precision_bits;
        let mut ft = FTensor::default();
        for b in &self.f.blocks {
            let labels = [
                self.weight(&b.labels[0])?,
                self.weight(&b.labels[1])?,
                self.weight(&b.labels[2])?,
                self.weight(&b.labels[3])?,
            ];
            let conv = |v: &[(String, usize, usize)]| -> Result<Vec<(Weight, usize, usize)>> {
                v.iter()
                    .map(|(e, a, c)| Ok((self.weight(e)?, *a, *c)))
                    .collect()
            };
            let rows = conv(&b.rows)?;
            let cols = conv(&b.cols)?;
            let mut m = linalg::zeros(prec, rows.len(), cols.len());
            for (i, j, x) in &b.entries {
                if *i >= rows.len() || *j >= cols.len() {
                    return Err(Error::Document(format!(
                        "F entry ({i},{j}) outside its block"
                    )));
                }
                m[*i][*j] = parse_num(x, prec)?;
            }
            ft.blocks.insert(labels, FBlock::new(labels, rows, cols, m));
        }
        Ok(ft)
    }

    pub fn r_tensor(&self) -> Result<RTensor> {
        let prec = self.context.precision_bits;
        let mut rt = RTensor {
            off_diagonal: self.r.off_diagonal,
            ..Default::default()
        };
        for (a, b, c, k, v) in &self.r.entries {
            rt.entries.insert(
                (self.weight(a)?, self.weight(b)?, self.weight(c)?, *k),
                parse_num(v, prec)?,
            );
        }
        Ok(rt)
    }

    /// Orthonormality of the stored CG vectors within each table.
    pub fn cg_orthogonality(&self) -> Result<Residual> {
        let prec = self.context.precision_bits;
        let mut res = Residual::default();
        for t in &self.cg.tables {
            type Vecs = BTreeMap<
                (String, usize, String, usize, String),
                HashMap<(String, usize, String, usize), ComplexValue>,
            >;
            let mut vecs: Vecs = BTreeMap::new();
            for ch in &t.channels {
                for (m1, u1, m2, u2, m, u, v) in &ch.entries {
                    vecs.entry((
                        m.clone(),
                        *u,
                        ch.j.clone(),
                        ch.alpha,
                        format!("{}", ch.alpha),
                    ))
                    .or_default()
                    .insert((m1.clone(), *u1, m2.clone(), *u2), parse_num(v, prec)?);
                }
            }
            let keys: Vec<_> = vecs.keys().cloned().collect();
            for (i, ka) in keys.iter().enumerate() {
                for kb in &keys[i..] {
                    if ka.0 != kb.0 {
                        continue;
                    }
                    let (va, vb) = (&vecs[ka], &vecs[kb]);
                    let mut acc = ComplexValue::zero(prec);
                    for (k, x) in va {
                        if let Some(y) = vb.get(k) {
                            acc.add_mul(x, y);
                        }
                    }
                    if ka == kb {
                        acc -= &ComplexValue::one(prec);
                    }
                    res.record(acc.abs_f64(), || {
                        format!(
                            "{}⊗{} ({},{}) vs ({},{})",
                            t.j1, t.j2, ka.2, ka.3, kb.2, kb.3
                        )
                    });
                }
            }
        }
        Ok(res)
    }

    /// Re-runs the checks that only need the stored data.
    pub fn verify(&self) -> Result<Vec<DocResidual>> {
        let prec = self.context.precision_bits;
        let rules = self.rules()?;
        let f = self.f_tensor()?;
        let r = self.r_tensor()?;
        let mut f_orth = Residual::default();
        for b in f.blocks.values() {
            let [a, bb, c, d] = b.labels;
            f_orth.record(b.orthogonality(), || format!("F^({a},{bb},{c})_({d})"));
        }
        let dims: Vec<ComplexValue> = self
            .labels
            .iter()
            .map(|l| parse_num(&l.dim, prec))
            .collect::<Result<_>>()?;
        let out = vec![
            ("pentagon", verify_pentagon(&rules, &f, prec)),
            ("hexagon", verify_hexagon(&rules, &f, &r, false, prec)),
            (
                "hexagon_inverse",
                verify_hexagon(&rules, &f, &r, true, prec),
            ),
            ("f_orthogonality", f_orth),
            ("cg_orthogonality", self.cg_orthogonality()?),
            (
                "dimension_homomorphism",
                Residual {
                    max: dimension_homomorphism_residual(&rules, &dims),
                    worst: String::new(),
                    instances: 1,
                },
            ),
        ];
        Ok(out
            .into_iter()
            .map(|(n, r)| DocResidual {
                name: n.into(),
                max: r.max,
                worst: r.worst,
            })
            .collect())
    }
}

// ---------- formatting ----------

/// Short human-readable rendering of a complex number.
pub fn short(v: &ComplexValue) -> String {
    let (re, im) = v.to_c64();
    let clean = |x: f64| if x.abs() < 1e-12 { 0.0 } else { x };
    let (re, im) = (clean(re), clean(im));
    if im == 0.0 {
        format!("{re:.10}")
    } else if re == 0.0 {
        format!("{im:.10}i")
    } else {
        format!("{re:.10}{im:+.10}i")
    }
}

fn short_num(n: &Num) -> String {
    match ComplexValue::parse(64, &n[0], &n[1]) {
        Some(v) => short(&v),
        None => format!("{}+{}i", n[0], n[1]),
    }
}

fn labels_in(sel: &str) -> Vec<String> {
    let sel = sel.replace("->", " ").replace(['→', '×', 'x', 'X'], " ");
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0;
    for ch in sel.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            c if depth == 0 && (c.is_whitespace() || c == ';') => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

pub fn render_tqft(doc: &TheoryDocument) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "| label | dual | d | θ | fb |");
    let _ = writeln!(s, "|---|---|---|---|---|");
    for l in &doc.labels {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} |",
            l.name,
            l.dual,
            short_num(&l.dim),
            short_num(&l.twist),
            short_num(&l.fb)
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "D = {}", short_num(&doc.total_dimension));
    let _ = writeln!(s, "c = {} (mod 8)", doc.central_charge);
    if !doc.context.modular {
        let _ = writeln!(
            s,
            "(not modular: c is advisory, |Gauss sum|/D = {})",
            doc.gauss_modulus
        );
    }
    s
}

pub fn render_fusion(doc: &TheoryDocument) -> String {
    let mut s = String::new();
    let mut by: BTreeMap<(usize, usize), Vec<String>> = BTreeMap::new();
    let pos = |n: &str| {
        doc.labels
            .iter()
            .position(|l| l.name == n)
            .unwrap_or(usize::MAX)
    };
    for (a, b, c, n) in &doc.fusion.entries {
        let t = if *n > 1 {
            format!("{n}·{c}")
        } else {
            c.clone()
        };
        by.entry((pos(a), pos(b))).or_default().push(t);
    }
    for ((a, b), v) in by {
        if a <= b {
            let _ = writeln!(
                s,
                "{} × {} = {}",
                doc.labels[a].name,
                doc.labels[b].name,
                v.join(" + ")
            );
        }
    }
    s
}

pub fn render_r(doc: &TheoryDocument, sel: Option<&str>) -> Result<String> {
    let want = sel.map(labels_in).unwrap_or_default();
    let mut by: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let pos = |n: &str| {
        doc.labels
            .iter()
            .position(|l| l.name == n)
            .unwrap_or(usize::MAX)
    };
    for (a, b, c, k, v) in &doc.r.entries {
        if want.len() >= 2
            && (doc.weight(&want[0])?.to_string() != *a || doc.weight(&want[1])?.to_string() != *b)
        {
            continue;
        }
        by.entry(pos(c)).or_default().push(format!(
            "R^{{{a},{b}}}_{{{c},{}}} = {}",
            k + 1,
            short_num(v)
        ));
    }
    let mut s = String::new();
    for (c, lines) in by {
        let _ = writeln!(s, "### {}", doc.labels[c].name);
        for l in lines {
            let _ = writeln!(s, "- {l}");
        }
    }
    Ok(s)
}

pub fn render_f(doc: &TheoryDocument, sel: Option<&str>) -> Result<String> {
    let want: Vec<String> = match sel {
        Some(x) => labels_in(x)
            .iter()
            .map(|l| doc.weight(l).map(|w| w.to_string()))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let mut s = String::new();
    for b in &doc.f.blocks {
        if !want.is_empty() && want.as_slice() != b.labels.as_slice() {
            continue;
        }
        let [a, bb, c, d] = &b.labels;
        let _ = writeln!(s, "### F^{{{a},{bb},{c}}}_{{{d}}}");
        let head: Vec<String> = b
            .cols
            .iter()
            .map(|(f, g, h)| vertex_name(f, *g, *h))
            .collect();
        let _ = writeln!(s, "| | {} |", head.join(" | "));
        let _ = writeln!(s, "|---|{}", "---|".repeat(head.len()));
        let mut m = vec![vec!["0".to_string(); b.cols.len()]; b.rows.len()];
        for (i, j, x) in &b.entries {
            m[*i][*j] = short_num(x);
        }
        for (row, (e, al, be)) in m.iter().zip(&b.rows) {
            let _ = writeln!(s, "| {} | {} |", vertex_name(e, *al, *be), row.join(" | "));
        }
        let _ = writeln!(s);
    }
    if s.is_empty() && !want.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no F block {}",
            want.join(" ")
        )));
    }
    Ok(s)
}

fn vertex_name(e: &str, a: usize, b: usize) -> String {
    format!("{e}[{},{}]", a + 1, b + 1)
}

pub fn render_cg(doc: &TheoryDocument, sel: Option<&str>) -> Result<String> {
    let want: Vec<String> = match sel {
        Some(x) => labels_in(x)
            .iter()
            .map(|l| doc.weight(l).map(|w| w.to_string()))
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let mut s = String::new();
    for t in &doc.cg.tables {
        if want.len() >= 2 && (want[0] != t.j1 || want[1] != t.j2) {
            continue;
        }
        for ch in &t.channels {
            if want.len() >= 3 && want[2] != ch.j {
                continue;
            }
            let _ = writeln!(
                s,
                "### {} ⊗ {} → {} (channel {})",
                t.j1,
                t.j2,
                ch.j,
                ch.alpha + 1
            );
            let mut cell: HashMap<(String, usize, String, usize), Vec<String>> = HashMap::default();
            let multi = ch.entries.iter().any(|e| e.5 > 0);
            for (m1, u1, m2, u2, m, u, v) in &ch.entries {
                let text = if multi {
                    format!("{m}#{}: {}", u + 1, short_num(v))
                } else {
                    short_num(v)
                };
                cell.entry((m1.clone(), *u1, m2.clone(), *u2))
                    .or_default()
                    .push(text);
                let _ = m;
            }
            let st = |x: &(String, usize), all: &[(String, usize)]| {
                if all.iter().filter(|y| y.0 == x.0).count() > 1 {
                    format!("{}#{}", x.0, x.1 + 1)
                } else {
                    x.0.clone()
                }
            };
            let head: Vec<String> = t.states2.iter().map(|x| st(x, &t.states2)).collect();
            let _ = writeln!(s, "| m1 \\ m2 | {} |", head.join(" | "));
            let _ = writeln!(s, "|---|{}", "---|".repeat(head.len()));
            for x in &t.states1 {
                let row: Vec<String> = t
                    .states2
                    .iter()
                    .map(|y| {
                        cell.get(&(x.0.clone(), x.1, y.0.clone(), y.1))
                            .map(|v| v.join("; "))
                            .unwrap_or_default()
                    })
                    .collect();
                let _ = writeln!(s, "| {} | {} |", st(x, &t.states1), row.join(" | "));
            }
            let _ = writeln!(s);
        }
    }
    if s.is_empty() && !want.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no CG table matches '{}'",
            want.join(" ")
        )));
    }
    Ok(s)
}

pub fn render_markdown(doc: &TheoryDocument) -> Result<String> {
    let mut s = String::new();
    let c = &doc.context;
    let _ = writeln!(
        s,
        "# {} at level {}{}\n",
        c.algebra,
        c.level,
        if c.restrict_z3 { " / Z3" } else { "" }
    );
    let _ = writeln!(
        s,
        "q = exp(2πi·{}/{}), {} bits, tolerance {:e}\n",
        c.q_phase.numerator, c.q_phase.denominator, c.precision_bits, c.tolerance
    );
    for w in &doc.warnings {
        let _ = writeln!(s, "> warning: {w}\n");
    }
    let _ = writeln!(s, "## Topological data\n\n{}", render_tqft(doc));
    let _ = writeln!(s, "## Fusion rules\n\n{}", render_fusion(doc));
    let _ = writeln!(s, "## R-symbols\n\n{}", render_r(doc, None)?);
    let _ = writeln!(s, "## F-symbols\n\n{}", render_f(doc, None)?);
    let _ = writeln!(s, "## Verification\n");
    for r in &doc.verification {
        let _ = writeln!(s, "- {}: {:.3e} {}", r.name, r.max, r.worst);
    }
    Ok(s)
}

// ---------- commands ----------

/// Outcome of a command: text for stdout and the exit code.
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

fn error_record(kind: &str, msg: &str) -> String {
    serde_json::json!({ "error": kind, "message": msg }).to_string()
}

fn invalid(e: &Error) -> Outcome {
    Outcome {
        stdout: String::new(),
        stderr: error_record("invalid_input", &e.to_string()),
        code: 2,
    }
}

fn precision_from_env() -> Result<Option<u32>> {
    match std::env::var(PRECISION_ENV) {
        Ok(v) => {
            v.trim().parse::<u32>().map(Some).map_err(|_| {
                Error::InvalidInput(format!("{PRECISION_ENV}='{v}' is not a bit count"))
            })
        }
        Err(_) => Ok(None),
    }
}

pub fn cmd_derive(
    algebra: &str,
    level: u32,
    precision: Option<u32>,
    tolerance: Option<f64>,
    restrict_z3: bool,
) -> Result<(TheoryDocument, bool)> {
    let name: AlgebraName = algebra.parse()?;
    let precision = match precision {
        Some(p) => p,
        None => precision_from_env()?.unwrap_or(DEFAULT_PRECISION),
    };
    if let Some(t) = tolerance {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidInput(format!("tolerance {t} outside (0,1)")));
        }
    }
    let opts = TheoryOptions {
        precision,
        tolerance,
        restrict_z3,
    };
    let theory = TheoryData::build(name, level, &opts)?;
    let doc = TheoryDocument::from_theory(&theory)?;
    let bound = tolerance.unwrap_or_else(|| default_tolerance(precision));
    let pass = doc.verification.iter().all(|r| r.max <= bound);
    Ok((doc, pass))
}

pub fn load(path: &PathBuf) -> Result<TheoryDocument> {
    let text = std::fs::read_to_string(path)?;
    let doc: TheoryDocument = serde_json::from_str(&text)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(Error::Document(format!(
            "unsupported schema version {}",
            doc.schema_version
        )));
    }
    Ok(doc)
}

pub fn cmd_verify(path: &PathBuf) -> Result<(String, bool)> {
    let doc = load(path)?;
    let res = doc.verify()?;
    let bound = doc.context.tolerance;
    let mut s = String::new();
    let mut ok = true;
    for r in &res {
        let pass = r.max <= bound;
        ok &= pass;
        let _ = writeln!(
            s,
            "{:<24} {:.3e}  {}  {}",
            r.name,
            r.max,
            if pass { "PASS" } else { "FAIL" },
            r.worst
        );
    }
    let _ = writeln!(s, "{}", if ok { "PASS" } else { "FAIL" });
    Ok((s, ok))
}

pub fn cmd_table(path: &PathBuf, which: Which, selector: Option<&str>) -> Result<String> {
    let doc = load(path)?;
    match which {
        Which::Cg => render_cg(&doc, selector),
        Which::F => render_f(&doc, selector),
        Which::R => render_r(&doc, selector),
        Which::Tqft => Ok(format!("{}\n{}", render_tqft(&doc), render_fusion(&doc))),
    }
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Derive {
            algebra,
            level,
            precision,
            tolerance,
            format,
            out,
            restrict_z3,
        } => {
            let (doc, pass) = match cmd_derive(&algebra, level, precision, tolerance, restrict_z3) {
                Ok(x) => x,
                Err(e @ Error::InvalidInput(_)) => return invalid(&e),
                Err(e) => {
                    return Outcome {
                        stdout: String::new(),
                        stderr: error_record("derivation_failed", &e.to_string()),
                        code: 1,
                    }
                }
            };
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&doc).map_err(Error::from),
                Format::Markdown => render_markdown(&doc),
            };
            let text = match text {
                Ok(t) => t,
                Err(e) => {
                    return Outcome {
                        stdout: String::new(),
                        stderr: error_record("output", &e.to_string()),
                        code: 1,
                    }
                }
            };
            let mut stderr: Vec<String> = doc
                .warnings
                .iter()
                .map(|w| format!("warning: {w}"))
                .collect();
            if !pass {
                let worst = doc
                    .verification
                    .iter()
                    .max_by(|a, b| a.max.total_cmp(&b.max))
                    .expect("checks");
                stderr.push(error_record(
                    "verification_failed",
                    &format!("{} residual {:e} at {}", worst.name, worst.max, worst.worst),
                ));
            }
            let stdout = match out {
                Some(p) => match std::fs::write(&p, &text) {
                    Ok(()) => String::new(),
                    Err(e) => {
                        return Outcome {
                            stdout: String::new(),
                            stderr: error_record("io", &e.to_string()),
                            code: 1,
                        }
                    }
                },
                None => text,
            };
            Outcome {
                stdout,
                stderr: stderr.join("\n"),
                code: if pass { 0 } else { 1 },
            }
        }
        Command::Verify { path } => match cmd_verify(&path) {
            Ok((s, ok)) => Outcome {
                stdout: s,
                stderr: String::new(),
                code: if ok { 0 } else { 1 },
            },
            Err(e) => invalid(&e),
        },
        Command::Table {
            path,
            which,
            selector,
        } => match cmd_table(&path, which, selector.as_deref()) {
            Ok(s) => Outcome {
                stdout: s,
                stderr: String::new(),
                code: 0,
            },
            Err(e) => invalid(&e),
        },
    }
}
