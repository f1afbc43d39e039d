//! Shared helpers: a small evaluator for reference expressions and a checker for
//! the fixture files in `tests/fixtures`.
#![allow(dead_code)]

use std::path::PathBuf;

use anyonkit::liealg::Weight;
use anyonkit::qarith::{ComplexValue, QContext};
use anyonkit::theory::TheoryData;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(i64),
    Ident(String),
    Op(char),
}

fn lex(s: &str) -> Vec<Tok> {
    let cs: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let mut n = 0i64;
            while i < cs.len() && cs[i].is_ascii_digit() {
                n = n * 10 + cs[i].to_digit(10).unwrap() as i64;
                i += 1;
            }
            out.push(Tok::Num(n));
        } else if c.is_ascii_alphabetic() {
            // juxtaposed names such as `qsqrt` are split into known words
            let rest: String = cs[i..].iter().collect();
            let word = ["sqrt", "phi", "qn", "q"]
                .into_iter()
                .find(|w| rest.starts_with(w))
                .unwrap_or_else(|| panic!("unknown name at {rest}"));
            i += word.len();
            out.push(Tok::Ident(word.to_string()));
        } else {
            out.push(Tok::Op(c));
            i += 1;
        }
    }
    out
}

#[derive(Clone, Debug)]
enum Ast {
    Num(i64),
    Q,
    Phi,
    Neg(Box<Ast>),
    Bin(char, Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, Box<Ast>),
    Sqrt(Box<Ast>),
    Qn(i64, u32),
}

struct Parser {
    t: Vec<Tok>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.t.get(self.i)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Ast {
        let mut a = self.term();
        loop {
            if self.eat('+') {
                a = Ast::Bin('+', Box::new(a), Box::new(self.term()));
            } else if self.eat('-') {
                a = Ast::Bin('-', Box::new(a), Box::new(self.term()));
            } else {
                return a;
            }
        }
    }

    fn starts_primary(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('('))
        )
    }

    fn term(&mut self) -> Ast {
        let mut a = self.unary();
        loop {
            if self.eat('*') {
                a = Ast::Bin('*', Box::new(a), Box::new(self.unary()));
            } else if self.eat('/') {
                a = Ast::Bin('/', Box::new(a), Box::new(self.unary()));
            } else if self.starts_primary() {
                a = Ast::Bin('*', Box::new(a), Box::new(self.power()));
            } else {
                return a;
            }
        }
    }

    fn unary(&mut self) -> Ast {
        if self.eat('-') {
            Ast::Neg(Box::new(self.unary()))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Ast {
        let b = self.primary();
        if self.eat('^') {
            let e = self.primary();
            Ast::Pow(Box::new(b), Box::new(e))
        } else {
            b
        }
    }

    fn primary(&mut self) -> Ast {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.i += 1;
                Ast::Num(n)
            }
            Some(Tok::Op('(')) => {
                self.i += 1;
                let a = self.expr();
                assert!(self.eat(')'), "missing ')'");
                a
            }
            Some(Tok::Ident(id)) => {
                self.i += 1;
                match id.as_str() {
                    "q" => Ast::Q,
                    "phi" => Ast::Phi,
                    "sqrt" => {
                        assert!(self.eat('('));
                        let a = self.expr();
                        assert!(self.eat(')'));
                        Ast::Sqrt(Box::new(a))
                    }
                    "qn" => {
                        assert!(self.eat('('));
                        let Some(Tok::Num(n)) = self.peek().cloned() else {
                            panic!("qn argument")
                        };
                        self.i += 1;
                        assert!(self.eat(','));
                        let Some(Tok::Num(t)) = self.peek().cloned() else {
                            panic!("qn subscript")
                        };
                        self.i += 1;
                        assert!(self.eat(')'));
                        Ast::Qn(n, t as u32)
                    }
                    other => panic!("unknown name {other}"),
                }
            }
            t => panic!("unexpected token {t:?}"),
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Exponents are exact rationals.
fn rational(a: &Ast) -> (i64, i64) {
    let norm = |n: i64, d: i64| {
        let g = gcd(n, d).max(1);
        let s = if d < 0 { -1 } else { 1 };
        (s * n / g, s * d / g)
    };
    match a {
        Ast::Num(n) => (*n, 1),
        Ast::Neg(x) => {
            let (n, d) = rational(x);
            (-n, d)
        }
        Ast::Bin(op, x, y) => {
            let (a, b) = rational(x);
            let (c, d) = rational(y);
            match op {
                '+' => norm(a * d + b * c, b * d),
                '-' => norm(a * d - b * c, b * d),
                '*' => norm(a * c, b * d),
                '/' => norm(a * d, b * c),
                _ => unreachable!(),
            }
        }
        other => panic!("exponent {other:?} is not rational"),
    }
}

fn eval_ast(a: &Ast, ctx: &QContext) -> ComplexValue {
    match a {
        Ast::Num(n) => ctx.int(*n),
        Ast::Q => ctx.q_power_frac(1, 1),
        Ast::Phi => {
            let five = ctx.int(5).sqrt();
            &(&five + &ctx.one()) / &ctx.int(2)
        }
        Ast::Neg(x) => -&eval_ast(x, ctx),
        Ast::Bin(op, x, y) => {
            let (x, y) = (eval_ast(x, ctx), eval_ast(y, ctx));
            match op {
                '+' => &x + &y,
                '-' => &x - &y,
                '*' => &x * &y,
                '/' => &x / &y,
                _ => unreachable!(),
            }
        }
        Ast::Pow(b, e) => {
            let (n, d) = rational(e);
            if matches!(**b, Ast::Q) {
                ctx.q_power_frac(n, d)
            } else {
                assert_eq!(d, 1, "non-integer power of a non-q base");
                eval_ast(b, ctx).powi(n)
            }
        }
        Ast::Sqrt(x) => eval_ast(x, ctx).sqrt(),
        Ast::Qn(n, t) => ctx.q_number(*n, *t).unwrap(),
    }
}

/// Context for evaluating reference expressions at `q = exp(2πi/(k+g))`.
pub fn eval_context(level: u32, dual_coxeter: u32) -> QContext {
    QContext::root_of_unity(level, dual_coxeter, 24, 128)
}

pub fn eval(expr: &str, ctx: &QContext) -> ComplexValue {
    let mut p = Parser { t: lex(expr), i: 0 };
    let a = p.expr();
    assert!(p.i == p.t.len(), "trailing input in {expr}");
    eval_ast(&a, ctx)
}

pub fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(format!("{name}.txt"));
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[derive(Default, Debug)]
pub struct Tally {
    pub checked: usize,
    pub max_err: f64,
    pub failures: Vec<String>,
}

impl Tally {
    fn record(&mut self, err: f64, tol: f64, what: impl FnOnce() -> String) {
        self.checked += 1;
        if err > self.max_err || err.is_nan() {
            self.max_err = if err.is_nan() { f64::INFINITY } else { err };
        }
        if !(err <= tol) {
            self.failures.push(format!("{} (error {err:.2e})", what()));
        }
    }

    fn fail(&mut self, what: String) {
        self.checked += 1;
        self.max_err = f64::INFINITY;
        self.failures.push(what);
    }

    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.checked > 0
    }
}

#[derive(Default, Debug)]
pub struct GoldenReport {
    pub cg: Tally,
    pub f: Tally,
    pub r: Tally,
}

fn w(s: &str) -> Weight {
    Weight::parse(s.trim()).unwrap()
}

fn state(s: &str) -> (Weight, Option<usize>) {
    let mut it = s.split_whitespace();
    let wt = w(it.next().unwrap());
    let mu = it.next().unwrap();
    (
        wt,
        if mu == "*" {
            None
        } else {
            Some(mu.parse().unwrap())
        },
    )
}

/// Compares every record of a fixture file with the derived theory.
pub fn check_fixture(name: &str, t: &TheoryData, tol: f64) -> GoldenReport {
    let ctx = eval_context(t.level, t.alg.dual_coxeter);
    let text = fixture(name);
    let mut order: Vec<Weight> = Vec::new();
    let mut rep = GoldenReport::default();
    for line in text.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(" | ").map(str::trim).collect();
        match f[0] {
            "order" => order = f[1].split_whitespace().map(w).collect(),
            "cg" => {
                let (j1, j2, j) = (w(f[1]), w(f[2]), w(f[3]));
                let alpha: usize = f[4].parse().unwrap();
                let (m1, mu1) = state(f[5]);
                let (m2, mu2) = state(f[6]);
                let (m, mu) = state(f[7]);
                let want = eval(f[8], &ctx);
                let table = t.engine.cg_table(&j1, &j2).unwrap();
                let Some(ch) = table.channel(&j, alpha) else {
                    rep.cg.fail(format!("missing channel {line}"));
                    continue;
                };
                let mus: Vec<usize> = match mu {
                    Some(x) => vec![x],
                    None => (0..ch.module.states_of_weight(&m).len()).collect(),
                };
                if mus.is_empty() {
                    let err = want.abs_f64();
                    rep.cg
                        .record(err, tol, || format!("weight outside target: {line}"));
                    continue;
                }
                if mus.len() > 1 && !want.is_zero_within(tol) {
                    rep.cg.fail(format!("ambiguous multiplicity: {line}"));
                    continue;
                }
                for x in mus {
                    let got = table
                        .coeff(&j, alpha, (m1, mu1.unwrap()), (m2, mu2.unwrap()), (m, x))
                        .cloned()
                        .unwrap_or_else(|| ctx.zero());
                    rep.cg.record((&got - &want).abs_f64(), tol, || {
                        format!("{line} -> got {:?}", got.to_c64())
                    });
                }
            }
            "f" | "fb" => {
                let abcd = [w(f[1]), w(f[2]), w(f[3]), w(f[4])];
                let (ij, expr) = if f[0] == "f" {
                    ((0, 0), f[5])
                } else {
                    let mut it = f[5].split_whitespace().map(|x| x.parse::<usize>().unwrap());
                    ((it.next().unwrap(), it.next().unwrap()), f[6])
                };
                let want = eval(expr, &ctx);
                let Some(b) = t.f.block(&abcd[0], &abcd[1], &abcd[2], &abcd[3]) else {
                    rep.f.fail(format!("missing block {line}"));
                    continue;
                };
                if f[0] == "f" && (b.rows.len() != 1 || b.cols.len() != 1) {
                    rep.f.fail(format!("block is not 1x1: {line}"));
                    continue;
                }
                let pos = |x: &Weight| order.iter().position(|o| o == x).unwrap_or(usize::MAX);
                let sorted = |v: &[(Weight, usize, usize)]| {
                    let mut idx: Vec<usize> = (0..v.len()).collect();
                    idx.sort_by_key(|&i| (pos(&v[i].0), v[i].1, v[i].2));
                    idx
                };
                let (rows, cols) = (sorted(&b.rows), sorted(&b.cols));
                if ij.0 >= rows.len() || ij.1 >= cols.len() {
                    rep.f.fail(format!("index outside block: {line}"));
                    continue;
                }
                let got = &b.m[rows[ij.0]][cols[ij.1]];
                rep.f.record((got - &want).abs_f64(), tol, || {
                    format!("{line} -> got {:?}", got.to_c64())
                });
            }
            "r" => {
                let alpha: usize = f[4].parse().unwrap();
                let want = eval(f[5], &ctx);
                match t.r.get(&w(f[1]), &w(f[2]), &w(f[3]), alpha) {
                    Some(got) => rep.r.record((got - &want).abs_f64(), tol, || {
                        format!("{line} -> got {:?}", got.to_c64())
                    }),
                    None => rep.r.fail(format!("missing R {line}")),
                }
            }
            other => panic!("unknown record {other}"),
        }
    }
    rep
}

/// Largest entrywise deviations of a derived su(2)_k theory from the closed forms.
#[derive(Debug, Default)]
pub struct OracleErrors {
    pub cg: f64,
    pub f: f64,
    pub r: f64,
    pub fb: f64,
    pub theta: f64,
    pub count: usize,
}

impl OracleErrors {
    pub fn max(&self) -> f64 {
        [self.cg, self.f, self.r, self.fb, self.theta]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Compares an su(2)_k theory with the closed forms. Each vertex `(a, b → c)` is
/// rescaled by the ratio of the two CG values at the closed form's largest entry.
pub fn su2_oracle(t: &TheoryData) -> OracleErrors {
    use anyonkit::su2k::{cg_closed, f_closed, r_closed};
    use std::collections::BTreeMap;

    let ctx = &t.engine.ctx;
    let k = t.level as i64;
    let mut err = OracleErrors::default();
    let mut gauge: BTreeMap<(i64, i64, i64), ComplexValue> = BTreeMap::new();
    let lab = |x: i64| Weight::a1(x as i32);
    for a in 0..=k {
        for b in 0..=k {
            let table = t.engine.cg_table(&lab(a), &lab(b)).unwrap();
            for ch in &table.channels {
                let c = ch.j.l[0] as i64;
                let mut entries = Vec::new();
                for m1 in (-a..=a).step_by(2) {
                    for m2 in (-b..=b).step_by(2) {
                        if (m1 + m2).abs() > c {
                            continue;
                        }
                        let want = cg_closed(ctx, a, m1, b, m2, c, m1 + m2).unwrap();
                        let got = table
                            .coeff(&ch.j, 0, (lab(m1), 0), (lab(m2), 0), (lab(m1 + m2), 0))
                            .cloned()
                            .unwrap_or_else(|| ctx.zero());
                        entries.push((want, got));
                    }
                }
                let (w0, g0) = entries
                    .iter()
                    .fold(
                        None::<&(ComplexValue, ComplexValue)>,
                        |best, e| match best {
                            Some(b) if b.0.abs_f64() >= e.0.abs_f64() => Some(b),
                            _ => Some(e),
                        },
                    )
                    .unwrap();
                let u = g0 / w0;
                err.cg = err.cg.max((u.abs_f64() - 1.0).abs());
                for (want, got) in &entries {
                    err.cg = err.cg.max((got - &(&u * want)).abs_f64());
                    err.count += 1;
                }
                gauge.insert((a, b, c), u);
            }
        }
    }
    for ((a, b, c), u) in &gauge {
        let got = t.r.get(&lab(*a), &lab(*b), &lab(*c), 0).unwrap();
        let want = &(&r_closed(ctx, *a, *b, *c) * &gauge[&(*b, *a, *c)]) / u;
        err.r = err.r.max((got - &want).abs_f64());
        err.count += 1;
    }
    for block in t.f.blocks.values() {
        let [a, b, c, d] = block.labels.map(|w| w.l[0] as i64);
        for (i, (e, _, _)) in block.rows.iter().enumerate() {
            for (j, (f, _, _)) in block.cols.iter().enumerate() {
                let (e, f) = (e.l[0] as i64, f.l[0] as i64);
                let left = &gauge[&(a, b, e)] * &gauge[&(e, c, d)];
                let right = &gauge[&(b, c, f)] * &gauge[&(a, f, d)];
                let want = &(&f_closed(ctx, a, b, c, d, e, f).unwrap() * &right) / &left;
                err.f = err.f.max((&block.m[i][j] - &want).abs_f64());
                err.count += 1;
            }
        }
    }
    for a in 0..=k {
        let i = a as usize;
        let fb = if a % 2 == 0 { ctx.one() } else { -&ctx.one() };
        err.fb = err.fb.max((&t.tqft.fb[i] - &fb).abs_f64());
        let theta = ctx.q_power_frac(a * (a + 2), 4);
        err.theta = err.theta.max((&t.tqft.twists[i] - &theta).abs_f64());
    }
    err
}
