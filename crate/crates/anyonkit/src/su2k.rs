//! Closed forms for su(2)_k, in Dynkin labels (spin times two).

use crate::error::{Error, Result};
use crate::qarith::{ComplexValue, QContext};

fn fact(ctx: &QContext, n: i64) -> Result<ComplexValue> {
    if n < 0 {
        return Err(Error::InvalidInput(format!(
            "negative factorial argument {n}"
        )));
    }
    ctx.q_factorial(n, 1)
}

fn sign(n: i64) -> i64 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub fn admissible_triple(a: i64, b: i64, c: i64) -> bool {
    a >= 0 && b >= 0 && c >= 0 && a <= b + c && b <= a + c && c <= a + b && (a + b + c) % 2 == 0
}

/// `Δ(a,b,c)`.
pub fn delta(ctx: &QContext, a: i64, b: i64, c: i64) -> Result<ComplexValue> {
    if !admissible_triple(a, b, c) {
        return Err(Error::InvalidInput(format!(
            "triple ({a},{b},{c}) violates the triangle or parity rule"
        )));
    }
    let num = &(&fact(ctx, (a + b - c) / 2)? * &fact(ctx, (a - b + c) / 2)?)
        * &fact(ctx, (-a + b + c) / 2)?;
    Ok((&num / &fact(ctx, (a + b + c + 2) / 2)?).sqrt())
}

/// CG coefficient `⟨a,k; b,l | c,m⟩`; exact zero outside the support.
pub fn cg_closed(
    ctx: &QContext,
    a: i64,
    k: i64,
    b: i64,
    l: i64,
    c: i64,
    m: i64,
) -> Result<ComplexValue> {
    let in_range = |j: i64, x: i64| x.abs() <= j && (j - x) % 2 == 0;
    if !admissible_triple(a, b, c)
        || !in_range(a, k)
        || !in_range(b, l)
        || !in_range(c, m)
        || k + l != m
    {
        return Ok(ctx.zero());
    }
    let pre = ctx.q_power_frac((a + b - c) * (a + b + c + 2) + 2 * (a * l - b * k), 16);
    let mut root = ctx.q_number(c + 1, 1)?;
    for x in [
        (a - k) / 2,
        (a + k) / 2,
        (b - l) / 2,
        (b + l) / 2,
        (c - m) / 2,
        (c + m) / 2,
    ] {
        root = &root * &fact(ctx, x)?;
    }
    let lo = 0.max(-(c - b + k)).max(-(c - a - l));
    let hi = (a + b - c).min(a - k).min(b + l);
    let mut sum = ctx.zero();
    let mut n = lo + lo.rem_euclid(2);
    while n <= hi {
        let mut den = fact(ctx, n / 2)?;
        for x in [
            (a - k - n) / 2,
            (b + l - n) / 2,
            (a + b - c - n) / 2,
            (c - b + k + n) / 2,
            (c - a - l + n) / 2,
        ] {
            den = &den * &fact(ctx, x)?;
        }
        let term = &ctx.q_power_frac(-n * (a + b + c + 2), 8) / &den;
        if sign(n / 2) > 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        n += 2;
    }
    Ok(&(&(&pre * &delta(ctx, a, b, c)?) * &root.sqrt()) * &sum)
}

/// `(F^{abc}_d)_{e,f}`; zero when a vertex is not allowed.
pub fn f_closed(
    ctx: &QContext,
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    e: i64,
    f: i64,
) -> Result<ComplexValue> {
    let k = ctx.level().map(|k| k as i64);
    let ok =
        |x: i64, y: i64, z: i64| admissible_triple(x, y, z) && k.is_none_or(|k| x + y + z <= 2 * k);
    if !(ok(a, b, e) && ok(c, d, e) && ok(b, c, f) && ok(a, d, f)) {
        return Ok(ctx.zero());
    }
    let mut pre = &(&delta(ctx, a, b, e)? * &delta(ctx, c, d, e)?)
        * &(&delta(ctx, b, c, f)? * &delta(ctx, a, d, f)?);
    pre = &pre * &(&ctx.q_number(e + 1, 1)? * &ctx.q_number(f + 1, 1)?).sqrt();
    if sign((a + b + c + d) / 2) < 0 {
        pre = -&pre;
    }
    let lo = (a + b + e).max(c + d + e).max(b + c + f).max(a + d + f);
    let hi = (a + b + c + d).min(a + c + e + f).min(b + d + e + f);
    let mut sum = ctx.zero();
    let mut n = lo;
    while n <= hi {
        let mut den = fact(ctx, (a + b + c + d - n) / 2)?;
        // the third factorial carries the same halving as the other two
        for x in [
            (a + c + e + f - n) / 2,
            (b + d + e + f - n) / 2,
            (n - a - b - e) / 2,
            (n - c - d - e) / 2,
            (n - b - c - f) / 2,
            (n - a - d - f) / 2,
        ] {
            den = &den * &fact(ctx, x)?;
        }
        let term = &fact(ctx, (n + 2) / 2)? / &den;
        if sign(n / 2) > 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        n += 2;
    }
    Ok(&pre * &sum)
}

/// `R^{ab}_c`.
pub fn r_closed(ctx: &QContext, a: i64, b: i64, c: i64) -> ComplexValue {
    let v = ctx.q_power_frac(c * (c + 2) - a * (a + 2) - b * (b + 2), 8);
    if sign((a + b - c) / 2) < 0 {
        -&v
    } else {
        v
    }
}

/// Outcomes of `a × b` at level k.
pub fn fusion_closed(k: i64, a: i64, b: i64) -> Vec<i64> {
    let hi = (a + b).min(2 * k - a - b);
    ((a - b).abs()..=hi).step_by(2).collect()
}
