//! Assembles a full anyon theory from an algebra and a level.

use crate::error::{Error, Result};
use crate::liealg::{AlgebraName, AlgebraSpec, Weight};
use crate::qarith::{default_tolerance, QContext};
use crate::symbols::{
    check_r_symmetries, compute_f_tensor, compute_r_tensor, verify_hexagon, verify_pentagon,
    FTensor, FusionRules, RTensor, Residual,
};
use crate::tensor::{verify_table, CgEngine};
use crate::tqft::{
    compute_tqft, dimension_homomorphism_residual, theta_symmetry_residual, Tetrahedral, TqftData,
};

pub const DEFAULT_PRECISION: u32 = 128;

#[derive(Clone, Debug)]
pub struct TheoryOptions {
    pub precision: u32,
    pub tolerance: Option<f64>,
    pub restrict_z3: bool,
}

impl Default for TheoryOptions {
    fn default() -> Self {
        TheoryOptions {
            precision: DEFAULT_PRECISION,
            tolerance: None,
            restrict_z3: false,
        }
    }
}

/// Labels kept by the Z3 quotient of su(3)_3.
pub fn z3_labels() -> Vec<Weight> {
    vec![
        Weight::a2(0, 0),
        Weight::a2(1, 1),
        Weight::a2(3, 0),
        Weight::a2(0, 3),
    ]
}

/// Whether `(algebra, level)` is one of the validated configurations.
pub fn is_validated(name: AlgebraName, level: u32, restrict_z3: bool) -> bool {
    match name {
        AlgebraName::A1 => (1..=8).contains(&level) && !restrict_z3,
        AlgebraName::A2 => (level == 2 && !restrict_z3) || (level == 3 && restrict_z3),
        AlgebraName::B2 | AlgebraName::G2 => level == 1 && !restrict_z3,
    }
}

pub struct TheoryData {
    pub alg: AlgebraSpec,
    pub level: u32,
    pub restrict_z3: bool,
    pub engine: CgEngine,
    pub rules: FusionRules,
    pub f: FTensor,
    pub r: RTensor,
    pub tqft: TqftData,
}

impl TheoryData {
    pub fn build(name: AlgebraName, level: u32, opts: &TheoryOptions) -> Result<Self> {
        if level == 0 {
            return Err(Error::InvalidInput("level must be positive".into()));
        }
        if opts.precision < 64 {
            return Err(Error::InvalidInput(format!(
                "precision {} below 64 bits",
                opts.precision
            )));
        }
        let alg = AlgebraSpec::new(name);
        if opts.restrict_z3 && !(name == AlgebraName::A2 && level == 3) {
            return Err(Error::InvalidInput(
                "the Z3 restriction applies to su(3) at level 3 only".into(),
            ));
        }
        let tol = opts
            .tolerance
            .unwrap_or_else(|| default_tolerance(opts.precision));
        let ctx = QContext::root_of_unity(
            level,
            alg.dual_coxeter,
            alg.root_denominator,
            opts.precision,
        )
        .with_tolerance(tol);
        let labels = if opts.restrict_z3 {
            z3_labels()
        } else {
            alg.admissible_weights(level)
        };
        let engine = CgEngine::new(alg.clone(), ctx);
        let rules = FusionRules::from_engine(&engine, &labels)?;
        let f = compute_f_tensor(&engine, &rules)?;
        let r = compute_r_tensor(&engine, &rules)?;
        let tqft = compute_tqft(&rules, &f, &r)?;
        Ok(TheoryData {
            alg,
            level,
            restrict_z3: opts.restrict_z3,
            engine,
            rules,
            f,
            r,
            tqft,
        })
    }

    pub fn labels(&self) -> &[Weight] {
        &self.rules.labels
    }

    pub fn index(&self, w: &Weight) -> Option<usize> {
        self.rules.labels.iter().position(|x| x == w)
    }

    pub fn precision(&self) -> u32 {
        self.engine.ctx.precision_bits
    }

    /// The Z3 quotient is not modular.
    pub fn modular(&self) -> bool {
        !self.restrict_z3
    }

    pub fn tetrahedral(&self) -> Tetrahedral<'_> {
        Tetrahedral {
            rules: &self.rules,
            f: &self.f,
            dims: &self.tqft.dims,
            fb: &self.tqft.fb,
            thetas: &self.tqft.thetas,
        }
    }

    /// Runs every consistency check.
    pub fn verify(&self) -> VerificationReport {
        let prec = self.precision();
        let mut cg = Residual::default();
        let mut equiv = Residual::default();
        for a in self.labels() {
            for b in self.labels() {
                if let Ok(t) = self.engine.cg_table(a, b) {
                    let rep = verify_table(&self.engine.ctx, &self.alg, &t);
                    cg.record(rep.orthogonality, || format!("{a}⊗{b}"));
                    equiv.record(rep.equivariance.max(rep.descent), || format!("{a}⊗{b}"));
                }
            }
        }
        let mut f_orth = Residual::default();
        for b in self.f.blocks.values() {
            let [a, bb, c, d] = b.labels;
            f_orth.record(b.orthogonality(), || format!("F^({a},{bb},{c})_({d})"));
        }
        let (r_swap, r_conj) = check_r_symmetries(&self.alg, &self.rules, &self.r);
        let fb_twist = self
            .tqft
            .fb
            .iter()
            .zip(&self.tqft.fb_from_twists)
            .filter_map(|(a, b)| b.as_ref().map(|b| (a - b).abs_f64()))
            .fold(0.0, f64::max);
        VerificationReport {
            pentagon: verify_pentagon(&self.rules, &self.f, prec),
            hexagon: verify_hexagon(&self.rules, &self.f, &self.r, false, prec),
            hexagon_inverse: verify_hexagon(&self.rules, &self.f, &self.r, true, prec),
            f_orthogonality: f_orth,
            cg_orthogonality: cg,
            equivariance: equiv,
            r_off_diagonal: self.r.off_diagonal,
            r_swap,
            r_conjugation: r_conj,
            theta_symmetry: theta_symmetry_residual(&self.rules, &self.tqft.fb, &self.tqft.thetas),
            tetrahedral_symmetry: self.tetrahedral().symmetry_residual(),
            dimension_homomorphism: dimension_homomorphism_residual(&self.rules, &self.tqft.dims),
            fb_from_twists: fb_twist,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub pentagon: Residual,
    pub hexagon: Residual,
    pub hexagon_inverse: Residual,
    pub f_orthogonality: Residual,
    pub cg_orthogonality: Residual,
    pub equivariance: Residual,
    pub r_off_diagonal: f64,
    pub r_swap: Residual,
    pub r_conjugation: Residual,
    pub theta_symmetry: Residual,
    pub tetrahedral_symmetry: Residual,
    pub dimension_homomorphism: f64,
    /// Deviation of the twist formula from the direct indicator (modular theories only).
    pub fb_from_twists: f64,
}

impl VerificationReport {
    /// Named residuals in report order.
    pub fn entries(&self) -> Vec<(&'static str, f64, String)> {
        let r = |x: &Residual| (x.max, x.worst.clone());
        let mut v = vec![
            ("pentagon", r(&self.pentagon)),
            ("hexagon", r(&self.hexagon)),
            ("hexagon_inverse", r(&self.hexagon_inverse)),
            ("f_orthogonality", r(&self.f_orthogonality)),
            ("cg_orthogonality", r(&self.cg_orthogonality)),
            ("equivariance", r(&self.equivariance)),
            ("r_off_diagonal", (self.r_off_diagonal, String::new())),
            ("r_swap", r(&self.r_swap)),
            ("r_conjugation", r(&self.r_conjugation)),
            ("theta_symmetry", r(&self.theta_symmetry)),
            ("tetrahedral_symmetry", r(&self.tetrahedral_symmetry)),
            (
                "dimension_homomorphism",
                (self.dimension_homomorphism, String::new()),
            ),
            ("fb_from_twists", (self.fb_from_twists, String::new())),
        ];
        v.drain(..).map(|(n, (m, w))| (n, m, w)).collect()
    }

    /// Largest residual among the checks that must hold for any theory.
    pub fn passes(&self, threshold: f64, modular: bool) -> bool {
        self.entries()
            .iter()
            .filter(|(n, _, _)| modular || *n != "fb_from_twists")
            .all(|(_, m, _)| *m <= threshold)
    }
}
