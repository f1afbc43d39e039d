//! Cartan data and weight combinatorics for A1, A2, B2 and G2.

use std::collections::BTreeMap;

use crate::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgebraName {
    A1,
    A2,
    B2,
    G2,
}

impl fmt::Display for AlgebraName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AlgebraName::A1 => "A1",
            AlgebraName::A2 => "A2",
            AlgebraName::B2 => "B2",
            AlgebraName::G2 => "G2",
        };
        f.write_str(s)
    }
}

impl FromStr for AlgebraName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A1" | "SU2" => Ok(AlgebraName::A1),
            "A2" | "SU3" => Ok(AlgebraName::A2),
            "B2" | "SO5" | "C2" => Ok(AlgebraName::B2),
            "G2" => Ok(AlgebraName::G2),
            _ => Err(Error::InvalidInput(format!("unknown algebra {s}"))),
        }
    }
}

/// Dynkin labels of a weight. Rank one weights keep the second slot at zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight {
    pub l: [i32; 2],
    pub rank: u8,
}

impl Weight {
    pub fn new(labels: &[i32]) -> Self {
        match labels.len() {
            1 => Weight {
                l: [labels[0], 0],
                rank: 1,
            },
            2 => Weight {
                l: [labels[0], labels[1]],
                rank: 2,
            },
            n => panic!("weights of rank {n} are not supported"),
        }
    }

    pub fn a1(a: i32) -> Self {
        Weight { l: [a, 0], rank: 1 }
    }

    pub fn a2(a: i32, b: i32) -> Self {
        Weight { l: [a, b], rank: 2 }
    }

    pub fn zero(rank: usize) -> Self {
        Weight {
            l: [0, 0],
            rank: rank as u8,
        }
    }

    pub fn labels(&self) -> &[i32] {
        &self.l[..self.rank as usize]
    }

    pub fn is_dominant(&self) -> bool {
        self.labels().iter().all(|&x| x >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.l == [0, 0]
    }

    pub fn add(&self, o: &Weight) -> Weight {
        Weight {
            l: [self.l[0] + o.l[0], self.l[1] + o.l[1]],
            rank: self.rank,
        }
    }

    pub fn sub(&self, o: &Weight) -> Weight {
        Weight {
            l: [self.l[0] - o.l[0], self.l[1] - o.l[1]],
            rank: self.rank,
        }
    }

    pub fn neg(&self) -> Weight {
        Weight {
            l: [-self.l[0], -self.l[1]],
            rank: self.rank,
        }
    }

    pub fn scaled(&self, k: i32) -> Weight {
        Weight {
            l: [self.l[0] * k, self.l[1] * k],
            rank: self.rank,
        }
    }

    /// Parses `(1,0)`, `1,0`, `1 0` or a single integer.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts: std::result::Result<Vec<i32>, _> = t
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .map(|p| p.parse::<i32>())
            .collect();
        match parts {
            Ok(v) if v.len() == 1 || v.len() == 2 => Ok(Weight::new(&v)),
            _ => Err(Error::InvalidInput(format!("cannot parse weight '{s}'"))),
        }
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank == 1 {
            write!(f, "{}", self.l[0])
        } else {
            write!(f, "({},{})", self.l[0], self.l[1])
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Static data of one algebra.
#[derive(Clone, Debug)]
pub struct AlgebraSpec {
    pub name: AlgebraName,
    pub rank: usize,
    pub cartan: [[i32; 2]; 2],
    pub t: [u32; 2],
    /// Quadratic form numerators; the form is `qf_num / qf_den`.
    pub qf_num: [[i64; 2]; 2],
    pub qf_den: i64,
    /// Positive roots in the simple-root basis.
    pub positive_roots: Vec<[i32; 2]>,
    pub dual_coxeter: u32,
    pub comarks: [i32; 2],
    pub root_denominator: u32,
}

impl AlgebraSpec {
    pub fn new(name: AlgebraName) -> Self {
        match name {
            AlgebraName::A1 => AlgebraSpec {
                name,
                rank: 1,
                cartan: [[2, 0], [0, 0]],
                t: [1, 1],
                qf_num: [[1, 0], [0, 0]],
                qf_den: 2,
                positive_roots: vec![[1, 0]],
                dual_coxeter: 2,
                comarks: [1, 0],
                root_denominator: 4,
            },
            AlgebraName::A2 => AlgebraSpec {
                name,
                rank: 2,
                cartan: [[2, -1], [-1, 2]],
                t: [1, 1],
                qf_num: [[2, 1], [1, 2]],
                qf_den: 3,
                positive_roots: vec![[1, 0], [0, 1], [1, 1]],
                dual_coxeter: 3,
                comarks: [1, 1],
                root_denominator: 12,
            },
            AlgebraName::B2 => AlgebraSpec {
                name,
                rank: 2,
                cartan: [[2, -2], [-1, 2]],
                t: [1, 2],
                qf_num: [[2, 1], [1, 1]],
                qf_den: 2,
                positive_roots: vec![[1, 0], [0, 1], [1, 1], [1, 2]],
                dual_coxeter: 3,
                comarks: [1, 1],
                root_denominator: 8,
            },
            AlgebraName::G2 => AlgebraSpec {
                name,
                rank: 2,
                cartan: [[2, -3], [-1, 2]],
                t: [1, 3],
                qf_num: [[6, 3], [3, 2]],
                qf_den: 3,
                positive_roots: vec![[1, 0], [0, 1], [1, 1], [1, 2], [1, 3], [2, 3]],
                dual_coxeter: 4,
                comarks: [2, 1],
                root_denominator: 12,
            },
        }
    }

    pub fn zero_weight(&self) -> Weight {
        Weight::zero(self.rank)
    }

    pub fn weight(&self, labels: &[i32]) -> Weight {
        let mut l = [0, 0];
        l[..labels.len()].copy_from_slice(labels);
        Weight {
            l,
            rank: self.rank as u8,
        }
    }

    /// Simple root `α_i` in Dynkin labels: row `i` of the Cartan matrix.
    pub fn simple_root(&self, i: usize) -> Weight {
        Weight {
            l: self.cartan[i],
            rank: self.rank as u8,
        }
    }

    /// `α_j(h_i)`, the shift of the `H_i` eigenvalue under `L^±_j`.
    pub fn root_shift(&self, i: usize, j: usize) -> i32 {
        self.cartan[j][i]
    }

    pub fn root_weight(&self, c: &[i32; 2]) -> Weight {
        let mut w = self.zero_weight();
        for i in 0..self.rank {
            w = w.add(&self.simple_root(i).scaled(c[i]));
        }
        w
    }

    /// `(a, b)` times `qf_den`.
    pub fn ip_scaled(&self, a: &Weight, b: &Weight) -> i64 {
        let mut s = 0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                s += a.l[i] as i64 * self.qf_num[i][j] * b.l[j] as i64;
            }
        }
        s
    }

    pub fn rho(&self) -> Weight {
        self.weight(&[1, 1][..self.rank])
    }

    /// `(λ, λ+2ρ)` times `qf_den`.
    pub fn casimir_scaled(&self, w: &Weight) -> i64 {
        self.ip_scaled(w, &w.add(&self.rho().scaled(2)))
    }

    /// Exponent of the twist `θ_λ = q^{(λ,λ+2ρ)/2}` as a fraction.
    pub fn twist_exponent(&self, w: &Weight) -> (i64, i64) {
        (self.casimir_scaled(w), 2 * self.qf_den)
    }

    pub fn level_of(&self, w: &Weight) -> i32 {
        (0..self.rank).map(|i| self.comarks[i] * w.l[i]).sum()
    }

    pub fn is_admissible(&self, w: &Weight, k: u32) -> bool {
        w.is_dominant() && self.level_of(w) <= k as i32
    }

    /// Admissible weights at level `k`, by level then descending Dynkin labels.
    pub fn admissible_weights(&self, k: u32) -> Vec<Weight> {
        let k = k as i32;
        let mut out = Vec::new();
        if self.rank == 1 {
            for a in 0..=k {
                out.push(Weight::a1(a));
            }
        } else {
            for a in 0..=k {
                for b in 0..=k {
                    let w = Weight::a2(a, b);
                    if self.level_of(&w) <= k {
                        out.push(w);
                    }
                }
            }
        }
        out.sort_by(|x, y| self.level_of(x).cmp(&self.level_of(y)).then(y.l.cmp(&x.l)));
        out
    }

    pub fn conjugate_weight(&self, m: &Weight) -> Weight {
        match self.name {
            AlgebraName::A2 => Weight {
                l: [m.l[1], m.l[0]],
                rank: 2,
            },
            _ => *m,
        }
    }

    /// `-m̄`, the weight reached by the lowest-weight relation.
    pub fn neg_conjugate(&self, m: &Weight) -> Weight {
        self.conjugate_weight(m).neg()
    }

    /// Simple-root coordinates of `hw - m` (times `qf_den`).
    fn depth_coords_scaled(&self, hw: &Weight, m: &Weight) -> [i64; 2] {
        // A^{-1} = F·diag(t), so c_j = Σ_i d_i F_ij t_j.
        let d = hw.sub(m);
        let mut c = [0i64; 2];
        for j in 0..self.rank {
            for i in 0..self.rank {
                c[j] += d.l[i] as i64 * self.qf_num[i][j] * self.t[j] as i64;
            }
        }
        c
    }

    /// Number of simple-root steps from `hw` down to `m`.
    pub fn depth(&self, hw: &Weight, m: &Weight) -> i64 {
        let c = self.depth_coords_scaled(hw, m);
        (c[0] + c[1]) / self.qf_den
    }

    /// True if `a - b` is a non-negative, nonzero combination of simple roots.
    pub fn strictly_above(&self, a: &Weight, b: &Weight) -> bool {
        let c = self.depth_coords_scaled(a, b);
        a != b && c.iter().all(|&x| x >= 0 && x % self.qf_den == 0)
    }

    /// Weyl dimension formula.
    pub fn weyl_dimension(&self, hw: &Weight) -> u64 {
        let lr = hw.add(&self.rho());
        let rho = self.rho();
        let mut num: i128 = 1;
        let mut den: i128 = 1;
        for c in &self.positive_roots {
            let a = self.root_weight(c);
            num *= self.ip_scaled(&lr, &a) as i128;
            den *= self.ip_scaled(&rho, &a) as i128;
        }
        (num / den) as u64
    }

    /// Weight multiplicities by Freudenthal's recursion, in canonical order
    /// (depth ascending, then Dynkin labels ascending).
    pub fn classical_weight_system(&self, hw: &Weight) -> Vec<(Weight, usize)> {
        let roots: Vec<Weight> = self
            .positive_roots
            .iter()
            .map(|c| self.root_weight(c))
            .collect();
        let lr = hw.add(&self.rho());
        let top = self.ip_scaled(&lr, &lr);
        let mut mult: HashMap<Weight, i64> = HashMap::default();
        mult.insert(*hw, 1);
        let mut layers: Vec<Vec<Weight>> = vec![vec![*hw]];
        loop {
            let mut next: BTreeMap<[i32; 2], Weight> = BTreeMap::new();
            for w in layers.last().unwrap() {
                for i in 0..self.rank {
                    let c = w.sub(&self.simple_root(i));
                    next.insert(c.l, c);
                }
            }
            let mut layer = Vec::new();
            for (_, mu) in next {
                let mr = mu.add(&self.rho());
                let denom = top - self.ip_scaled(&mr, &mr);
                if denom == 0 {
                    continue;
                }
                let mut num = 0i64;
                for a in &roots {
                    let mut k = 1;
                    loop {
                        let up = mu.add(&a.scaled(k));
                        if up != *hw && !self.strictly_above(hw, &up) {
                            break;
                        }
                        if let Some(&m) = mult.get(&up) {
                            num += m * self.ip_scaled(&up, a);
                        }
                        k += 1;
                    }
                }
                let m = 2 * num / denom;
                if m > 0 {
                    mult.insert(mu, m);
                    layer.push(mu);
                }
            }
            if layer.is_empty() {
                break;
            }
            layers.push(layer);
        }
        let mut out = Vec::new();
        for layer in layers {
            let mut layer = layer;
            layer.sort_by(|a, b| a.l.cmp(&b.l));
            for w in layer {
                out.push((w, mult[&w] as usize));
            }
        }
        out
    }

    /// Classical tensor product decomposition `a ⊗ b` as (highest weight, multiplicity).
    pub fn classical_tensor_product(&self, a: &Weight, b: &Weight) -> Vec<(Weight, usize)> {
        let mut chars: HashMap<Weight, i64> = HashMap::default();
        for (wa, ma) in self.classical_weight_system(a) {
            for (wb, mb) in self.classical_weight_system(b) {
                *chars.entry(wa.add(&wb)).or_insert(0) += (ma * mb) as i64;
            }
        }
        let mut out = Vec::new();
        loop {
            let top = chars
                .iter()
                .filter(|(_, &m)| m > 0)
                .map(|(w, _)| *w)
                .find(|w| {
                    !chars
                        .iter()
                        .any(|(v, &m)| m > 0 && self.strictly_above(v, w))
                });
            let Some(top) = top else { break };
            let m = chars[&top];
            for (w, mw) in self.classical_weight_system(&top) {
                *chars.get_mut(&w).unwrap() -= m * mw as i64;
            }
            out.push((top, m as usize));
        }
        out.sort_by(|x, y| {
            self.level_of(&x.0)
                .cmp(&self.level_of(&y.0))
                .then(y.0.l.cmp(&x.0.l))
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_form_is_inverse_cartan_over_t() {
        for n in [
            AlgebraName::A1,
            AlgebraName::A2,
            AlgebraName::B2,
            AlgebraName::G2,
        ] {
            let a = AlgebraSpec::new(n);
            for i in 0..a.rank {
                for j in 0..a.rank {
                    // Σ_l A_il (A^{-1})_lj = δ_ij with A^{-1} = F diag(t)
                    let s: i64 = (0..a.rank)
                        .map(|l| a.cartan[i][l] as i64 * a.qf_num[l][j] * a.t[j] as i64)
                        .sum();
                    assert_eq!(s, if i == j { a.qf_den } else { 0 }, "{n}");
                }
            }
            for i in 0..a.rank {
                for j in 0..a.rank {
                    assert_eq!(
                        a.t[i] as i32 * a.cartan[i][j],
                        a.t[j] as i32 * a.cartan[j][i]
                    );
                }
            }
        }
    }

    #[test]
    fn admissible_sets() {
        let a2 = AlgebraSpec::new(AlgebraName::A2);
        assert_eq!(a2.admissible_weights(2).len(), 6);
        assert_eq!(
            AlgebraSpec::new(AlgebraName::B2)
                .admissible_weights(1)
                .len(),
            3
        );
        assert_eq!(
            AlgebraSpec::new(AlgebraName::G2)
                .admissible_weights(1)
                .len(),
            2
        );
        assert_eq!(
            AlgebraSpec::new(AlgebraName::A1)
                .admissible_weights(2)
                .len(),
            3
        );
    }

    #[test]
    fn adjoint_weight_system() {
        let a2 = AlgebraSpec::new(AlgebraName::A2);
        let ws = a2.classical_weight_system(&Weight::a2(1, 1));
        assert_eq!(ws.len(), 7);
        assert_eq!(ws.iter().map(|x| x.1).sum::<usize>(), 8);
        assert!(ws.contains(&(Weight::a2(0, 0), 2)));
    }

    #[test]
    fn g2_seven() {
        let g2 = AlgebraSpec::new(AlgebraName::G2);
        let ws = g2.classical_weight_system(&Weight::a2(0, 1));
        assert_eq!(ws.len(), 7);
        assert!(ws.iter().all(|x| x.1 == 1));
        assert_eq!(g2.weyl_dimension(&Weight::a2(0, 1)), 7);
        assert_eq!(g2.weyl_dimension(&Weight::a2(1, 0)), 14);
    }

    #[test]
    fn conjugation() {
        let a2 = AlgebraSpec::new(AlgebraName::A2);
        assert_eq!(a2.conjugate_weight(&Weight::a2(1, 0)), Weight::a2(0, 1));
        let g2 = AlgebraSpec::new(AlgebraName::G2);
        assert_eq!(g2.conjugate_weight(&Weight::a2(0, 1)), Weight::a2(0, 1));
    }

    #[test]
    fn tensor_product_dimensions() {
        let a2 = AlgebraSpec::new(AlgebraName::A2);
        let d = a2.classical_tensor_product(&Weight::a2(1, 1), &Weight::a2(1, 1));
        let total: u64 = d
            .iter()
            .map(|(w, m)| a2.weyl_dimension(w) * *m as u64)
            .sum();
        assert_eq!(total, 64);
        assert!(d.contains(&(Weight::a2(1, 1), 2)));
    }
}
