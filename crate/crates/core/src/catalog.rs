//! Built-in groups with their expected properties, and the harness that
//! checks them.

use serde::Serialize;
use serde_json::{json, Value};

use num_traits::{Signed, Zero};

use crate::algebra::{self, LieAlgebra};
use crate::cli::AlgebraFile;
use crate::expr::{rat, to_f64, Expr, Rational, Symbols, ZeroTest};
use crate::fields;
use crate::flows;
use crate::invariants::{self, Verdict, VerifyMode};
use crate::mobility;

/// Admissible parameter values.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    None,
    NonZero,
    NonNegative,
    /// `c != 0` and `c^2 <= 1`.
    NonZeroUnit,
    /// Two parameters, not both zero.
    NotBothZero,
}

impl Constraint {
    pub fn admits(&self, p: &[Rational]) -> bool {
        match self {
            Constraint::None => true,
            Constraint::NonZero => !p[0].is_zero(),
            Constraint::NonNegative => !p[0].is_negative(),
            Constraint::NonZeroUnit => !p[0].is_zero() && &p[0] * &p[0] <= rat(1, 1),
            Constraint::NotBothZero => !(p[0].is_zero() && p[1].is_zero()),
        }
    }

    pub fn describe(&self, params: &[String]) -> String {
        let c = params.first().cloned().unwrap_or_default();
        match self {
            Constraint::None => String::new(),
            Constraint::NonZero => format!("{c} != 0"),
            Constraint::NonNegative => format!("{c} >= 0"),
            Constraint::NonZeroUnit => format!("{c} != 0, {c}^2 <= 1"),
            Constraint::NotBothZero => format!("({}, {}) != (0, 0)", params[0], params[1]),
        }
    }
}

/// Properties an entry is expected to have.  `None` means not checked.
#[derive(Clone, Debug, PartialEq)]
pub struct Expected {
    pub closed: bool,
    pub transitive: bool,
    pub pair_invariant_count: usize,
    pub essential_3pt: bool,
    pub two_point_criterion: Option<bool>,
    pub infinitesimal_exists: bool,
    pub infinitesimal_invariant: Option<String>,
    pub arc_length: Option<bool>,
    pub monodromy: Option<bool>,
    pub free_mobility: Option<bool>,
}

/// Which fixed points leave a one-parameter motion, and how to sample it.
#[derive(Clone, Debug, PartialEq)]
pub struct MonodromySetup {
    pub fixed: Vec<Vec<Rational>>,
    pub center: Vec<f64>,
    pub radius: f64,
    pub starts: usize,
    pub t_max: f64,
    pub steps: usize,
    pub tol: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogEntry {
    pub id: String,
    pub description: String,
    pub vars: Vec<String>,
    pub params: Vec<String>,
    pub gens: Vec<String>,
    pub constraint: Constraint,
    /// Sample parameter values (empty when there are no parameters).
    pub samples: Vec<Vec<Rational>>,
    /// Published or derived pair invariants, over `x1 y1 z1 x2 ...`.
    pub invariants: Vec<String>,
    pub expected: Expected,
    /// Expectations that differ at particular parameter values.
    pub overrides: Vec<(Vec<Rational>, Expected)>,
    /// Pair invariants that exist only at particular parameter values.
    pub sample_invariants: Vec<(Vec<Rational>, Vec<String>)>,
    pub monodromy: Option<MonodromySetup>,
    /// Id of the entry holding the reduced group at the origin.
    pub reduced: Option<String>,
}

impl CatalogEntry {
    pub fn symbols(&self) -> Symbols {
        Symbols::new(&self.vars, &self.params)
    }

    pub fn algebra(&self) -> LieAlgebra {
        LieAlgebra::parse(self.symbols(), &self.gens).unwrap_or_else(|e| panic!("entry {}: {e}", self.id))
    }

    pub fn pair_invariants(&self) -> Vec<Expr> {
        let sym = self.symbols().for_points(2);
        self.invariants.iter().map(|s| Expr::parse(s, &sym).unwrap_or_else(|e| panic!("entry {}: {e}", self.id))).collect()
    }

    pub fn expected_at(&self, params: &[Rational]) -> &Expected {
        self.overrides.iter().find(|(p, _)| p == params).map(|(_, e)| e).unwrap_or(&self.expected)
    }

    /// Parameter samples to run: at least one (the empty vector) when the
    /// entry has no parameters.
    pub fn runs(&self) -> Vec<Vec<Rational>> {
        if self.params.is_empty() {
            vec![vec![]]
        } else {
            self.samples.clone()
        }
    }

    pub fn to_alg_file(&self) -> AlgebraFile {
        let mut expect = vec![
            ("id".to_string(), self.id.clone()),
            ("closed".to_string(), self.expected.closed.to_string()),
            ("transitive".to_string(), self.expected.transitive.to_string()),
            ("pair_invariant_count".to_string(), self.expected.pair_invariant_count.to_string()),
            ("essential_3pt".to_string(), self.expected.essential_3pt.to_string()),
        ];
        if let Some(b) = self.expected.two_point_criterion {
            expect.push(("two_point_criterion".into(), b.to_string()));
        }
        if let Some(b) = self.expected.monodromy {
            expect.push(("monodromy".into(), b.to_string()));
        }
        if let Some(b) = self.expected.free_mobility {
            expect.push(("free_mobility".into(), b.to_string()));
        }
        if self.constraint != Constraint::None {
            expect.push(("constraint".into(), self.constraint.describe(&self.params)));
        }
        let mut comments = vec![format!("{}: {}", self.id, self.description)];
        for (p, exp) in &self.overrides {
            let vals: Vec<String> = p.iter().map(|v| v.to_string()).collect();
            comments.push(format!(
                "at {} = {}: pair_invariant_count={} two_point_criterion={:?} infinitesimal_exists={}",
                self.params.join(","),
                vals.join(","),
                exp.pair_invariant_count,
                exp.two_point_criterion,
                exp.infinitesimal_exists
            ));
        }
        AlgebraFile {
            comments,
            vars: self.vars.clone(),
            params: self.params.clone(),
            fields: self.gens.clone(),
            invariants: self.invariants.iter().map(|s| (2, s.clone())).collect(),
            expect,
        }
    }
}

fn r(s: &str) -> Rational {
    s.parse().expect("rational literal")
}

fn samples(values: &[&str], constraint: Constraint, boundary: &[&str]) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = values.iter().map(|v| vec![r(v)]).filter(|p| constraint.admits(p)).collect();
    out.extend(boundary.iter().map(|v| vec![r(v)]));
    out
}

const DEFAULT_VALUES: [&str; 4] = ["-2", "-1/3", "1/2", "3"];

struct Builder {
    e: CatalogEntry,
}

impl Builder {
    fn new(id: &str, description: &str, vars: &[&str], gens: &[&str]) -> Self {
        let three = vars.len() == 3 && gens.len() == 6;
        Builder {
            e: CatalogEntry {
                id: id.into(),
                description: description.into(),
                vars: vars.iter().map(|s| s.to_string()).collect(),
                params: vec![],
                gens: gens.iter().map(|s| s.to_string()).collect(),
                constraint: Constraint::None,
                samples: vec![],
                invariants: vec![],
                expected: Expected {
                    closed: true,
                    transitive: true,
                    pair_invariant_count: 1,
                    essential_3pt: false,
                    two_point_criterion: three.then_some(true),
                    infinitesimal_exists: true,
                    infinitesimal_invariant: None,
                    arc_length: None,
                    monodromy: None,
                    free_mobility: None,
                },
                overrides: vec![],
                sample_invariants: vec![],
                monodromy: None,
                reduced: None,
            },
        }
    }

    fn param(mut self, name: &str, constraint: Constraint, boundary: &[&str]) -> Self {
        self.e.params = vec![name.into()];
        self.e.constraint = constraint;
        self.e.samples = samples(&DEFAULT_VALUES, constraint, boundary);
        self
    }

    fn invariant(mut self, s: &str) -> Self {
        self.e.invariants.push(s.into());
        self
    }

    fn pairs(mut self, n: usize) -> Self {
        self.e.expected.pair_invariant_count = n;
        if n == 0 && self.e.expected.two_point_criterion.is_some() {
            self.e.expected.two_point_criterion = Some(false);
        }
        self
    }

    fn essential(mut self, b: bool) -> Self {
        self.e.expected.essential_3pt = b;
        self
    }

    fn infinitesimal(mut self, exists: bool) -> Self {
        self.e.expected.infinitesimal_exists = exists;
        self
    }

    fn infinitesimal_invariant(mut self, w: &str) -> Self {
        self.e.expected.infinitesimal_invariant = Some(w.into());
        self
    }

    fn arc_length(mut self, b: bool) -> Self {
        self.e.expected.arc_length = Some(b);
        self
    }

    fn free_mobility(mut self, b: bool) -> Self {
        self.e.expected.free_mobility = Some(b);
        self
    }

    fn monodromy(mut self, b: bool, setup: MonodromySetup) -> Self {
        self.e.expected.monodromy = Some(b);
        self.e.monodromy = Some(setup);
        self
    }

    fn reduced(mut self, id: &str) -> Self {
        self.e.reduced = Some(id.into());
        self
    }

    fn build(self) -> CatalogEntry {
        self.e
    }
}

const XYZ: [&str; 3] = ["x", "y", "z"];
const XY: [&str; 2] = ["x", "y"];

const EUCLID: [&str; 6] = ["p", "q", "r", "x*q - y*p", "y*r - z*q", "z*p - x*r"];
const ELLIPTIC: [&str; 6] = ["p + x*U", "q + y*U", "r + z*U", "x*q - y*p", "y*r - z*q", "z*p - x*r"];
const DIST: &str = "(x1 - x2)^2 + (y1 - y2)^2 + (z1 - z2)^2";
const CROSS_RATIO: &str = "((x1 - x2)^2 + (y1 - y2)^2 + (z1 - z2)^2 + (x1*y2 - y1*x2)^2 + (y1*z2 - z1*y2)^2 + (z1*x2 - x1*z2)^2)/(1 + x1*x2 + y1*y2 + z1*z2)^2";

/// Starts for the motion fixing the origin and `(1, 1, 0)`.
fn two_point_motion(t_max: f64) -> MonodromySetup {
    MonodromySetup {
        fixed: vec![vec![r("0"), r("0"), r("0")], vec![r("1"), r("1"), r("0")]],
        center: vec![0.1, -0.2, 0.1],
        radius: 0.2,
        starts: 8,
        t_max,
        steps: 20_000,
        tol: 1e-6,
    }
}

/// Replaces `U` by `x*p + y*q + z*r`.
fn expand_u(gens: &[&str]) -> Vec<String> {
    gens.iter().map(|g| g.replace('U', "(x*p + y*q + z*r)")).collect()
}

/// All built-in entries, sorted by id.
pub fn builtin_entries() -> Vec<CatalogEntry> {
    let mut v = Vec::new();
    let euclid = |id: &str| {
        Builder::new(id, "Euclidean motions of space", &XYZ, &EUCLID)
            .invariant(DIST)
            .infinitesimal_invariant("dx^2 + dy^2 + dz^2")
            .arc_length(true)
            .free_mobility(true)
            .monodromy(true, two_point_motion(8.0))
            .build()
    };
    let elliptic_gens = expand_u(&ELLIPTIC);
    let elliptic_refs: Vec<&str> = elliptic_gens.iter().map(String::as_str).collect();
    let elliptic = |id: &str| {
        Builder::new(id, "projective group of the imaginary quadric x^2 + y^2 + z^2 + 1 = 0", &XYZ, &elliptic_refs)
            .invariant(CROSS_RATIO)
            .free_mobility(true)
            .build()
    };
    v.push(euclid("thm37-1"));
    v.push(euclid("ex86-22"));
    v.push(
        Builder::new("thm37-2", "motions preserving x^2 + y^2 - z^2 on the plane at infinity", &XYZ, &["p", "q", "r", "x*q - y*p", "y*r + z*q", "z*p + x*r"])
            .invariant("(x1 - x2)^2 + (y1 - y2)^2 - (z1 - z2)^2")
            .free_mobility(false)
            .build(),
    );
    v.push(elliptic("thm37-3"));
    v.push(elliptic("ex86-23"));
    let hyper = expand_u(&["p - x*U", "q - y*U", "r - z*U", "x*q - y*p", "y*r - z*q", "z*p - x*r"]);
    let hyper: Vec<&str> = hyper.iter().map(String::as_str).collect();
    v.push(
        Builder::new("thm37-4", "projective group of the sphere x^2 + y^2 + z^2 = 1", &XYZ, &hyper)
            .invariant("((x1 - x2)^2 + (y1 - y2)^2 + (z1 - z2)^2 - (x1*y2 - y1*x2)^2 - (y1*z2 - z1*y2)^2 - (z1*x2 - x1*z2)^2)/(1 - x1*x2 - y1*y2 - z1*z2)^2")
            .free_mobility(true)
            .build(),
    );
    let ruled = expand_u(&["p - x*U", "q - y*U", "r + z*U", "x*q - y*p", "y*r + z*q", "z*p + x*r"]);
    let ruled: Vec<&str> = ruled.iter().map(String::as_str).collect();
    v.push(
        Builder::new("thm37-5", "projective group of the ruled quadric x^2 + y^2 - z^2 = 1", &XYZ, &ruled)
            .invariant("((x1 - x2)^2 + (y1 - y2)^2 - (z1 - z2)^2 - (x1*y2 - y1*x2)^2 + (y1*z2 - z1*y2)^2 + (z1*x2 - x1*z2)^2)/(1 - x1*x2 - y1*y2 + z1*z2)^2")
            .free_mobility(false)
            .build(),
    );
    v.push(
        Builder::new(
            "thm37-6",
            "conformal planar group lifted with a spiral twist",
            &XYZ,
            &["p", "q", "x*p + y*q + c*r", "y*p - x*q + r", "(x^2 - y^2)*p + 2*x*y*q + 2*(c*x - y)*r", "2*x*y*p + (y^2 - x^2)*q + 2*(x + c*y)*r"],
        )
        .param("c", Constraint::NonNegative, &["0"])
        .invariant("z1 + z2 - c*log((x2 - x1)^2 + (y2 - y1)^2) + 2*atan((y2 - y1)/(x2 - x1))")
        .free_mobility(false)
        .build(),
    );
    v.push(
        Builder::new(
            "thm37-7",
            "conformal planar group lifted by the logarithm of the scale",
            &XYZ,
            &["p", "q", "x*p + y*q + r", "y*p - x*q", "(x^2 - y^2)*p + 2*x*y*q + 2*x*r", "2*x*y*p + (y^2 - x^2)*q + 2*y*r"],
        )
        .invariant("z1 + z2 - log((x2 - x1)^2 + (y2 - y1)^2)")
        .free_mobility(false)
        .build(),
    );
    let group8 = ["p", "q", "x*p + r", "y*q + c*r", "x^2*p + 2*x*r", "y^2*q + 2*c*y*r"];
    let inv8 = "z1 + z2 - log((x2 - x1)^2) - c*log((y2 - y1)^2)";
    v.push(
        Builder::new("thm37-8", "product of two projective lines lifted to space", &XYZ, &group8)
            .param("c", Constraint::NonZeroUnit, &["1", "-1"])
            .invariant(inv8)
            .free_mobility(false)
            .build(),
    );
    let group9 = ["p", "q", "x*q + r", "x^2*q + 2*x*r", "x*p + y*q + c*r", "x^2*p + 2*x*y*q + 2*(y + c*x)*r"];
    let inv9 = "z1 + z2 - c*log((x2 - x1)^2) - 2*(y2 - y1)/(x2 - x1)";
    v.push(
        Builder::new("thm37-9", "second imprimitive family with one parameter", &XYZ, &group9)
            .param("c", Constraint::None, &["0"])
            .invariant(inv9)
            .free_mobility(false)
            .build(),
    );
    let group10 = ["p - y*r", "q + x*r", "r", "x*q", "x*p - y*q", "y*p"];
    let inv10 = "z2 - z1 + x1*y2 - x2*y1";
    v.push(Builder::new("thm37-10", "special linear group lifted by a central extension", &XYZ, &group10).invariant(inv10).free_mobility(false).build());
    let group11 = ["p", "q", "r", "x*q + y*r", "2*x*p + y*q", "x^2*p + x*y*q + y^2/2*r"];
    let inv11 = "z2 - z1 - (y2 - y1)^2/(2*(x2 - x1))";
    v.push(Builder::new("thm37-11", "five-parameter planar group lifted to space", &XYZ, &group11).invariant(inv11).free_mobility(false).build());

    v.push(
        Builder::new("ex87-28", "general linear group of the plane prolonged to first jets", &XYZ, &["p", "q", "x*q + r", "y*q + z*r", "x*p - z*r", "y*p - z^2*r"])
            .pairs(0)
            .essential(true)
            .infinitesimal(false)
            .build(),
    );
    v.push(
        Builder::new("ex87-30", "second reduced form lifted to space", &XYZ, &["p", "q", "x*q + r", "x*p + y*q", "x*p - y*q - 2*z*r", "x^2*p + x*y*q + (y - x*z)*r"])
            .pairs(0)
            .essential(true)
            .infinitesimal(false)
            .build(),
    );
    v.push(
        Builder::new("ex87-32", "second imprimitive family with one parameter", &XYZ, &group9)
            .param("c", Constraint::None, &["0"])
            .invariant(inv9)
            .build(),
    );
    v.push(
        Builder::new("ex87-38", "product of two projective lines lifted to space", &XYZ, &group8)
            .param("c", Constraint::NonZero, &[])
            .invariant(inv8)
            .invariant("(x2 - x1)*exp(c*log(y2 - y1))*exp(-(z1 + z2)/2)")
            .build(),
    );
    v.push(Builder::new("ex87-45", "special linear group lifted by a central extension", &XYZ, &group10).invariant(inv10).free_mobility(false).build());
    let mut e51 = Builder::new("ex87-51", "one-parameter family whose pair invariant appears only at c = 0", &XYZ, &["p", "q", "r", "2*x*p + y*q", "x*q + y*r", "x^2*p + x*y*q + (y^2/2 + c*x)*r"])
        .param("c", Constraint::None, &["0"])
        .pairs(0)
        .essential(true)
        .infinitesimal(false)
        .build();
    let mut at_zero = e51.expected.clone();
    at_zero.pair_invariant_count = 1;
    at_zero.two_point_criterion = Some(true);
    at_zero.essential_3pt = false;
    at_zero.infinitesimal_exists = true;
    e51.overrides.push((vec![r("0")], at_zero));
    e51.sample_invariants.push((vec![r("0")], vec![inv11.into()]));
    v.push(e51);
    v.push(Builder::new("ex87-52", "five-parameter planar group lifted to space", &XYZ, &group11).invariant(inv11).build());

    let mut e58 = Builder::new(
        "ex89-58",
        "conformal planar group lifted with two parameters",
        &XYZ,
        &["p", "q", "x*p + y*q + a*r", "y*p - x*q + b*r", "(x^2 - y^2)*p + 2*x*y*q + 2*(a*x - b*y)*r", "2*x*y*p + (y^2 - x^2)*q + 2*(b*x + a*y)*r"],
    )
    .invariant("z1 + z2 - a*log((x2 - x1)^2 + (y2 - y1)^2) + 2*b*atan((y2 - y1)/(x2 - x1))")
    .build();
    e58.params = vec!["a".into(), "b".into()];
    e58.constraint = Constraint::NotBothZero;
    e58.samples = [("-2", "1/2"), ("3", "-1/3"), ("1/2", "0"), ("0", "3"), ("1", "0"), ("0", "1")]
        .iter()
        .map(|(a, b)| vec![r(a), r(b)])
        .collect();
    v.push(e58);

    v.push(
        Builder::new("ex90-60a", "translations with an anisotropic scaling", &XY, &["p", "q", "x*p + c*y*q"])
            .param("c", Constraint::NonZero, &[])
            .invariant("c*log((x2 - x1)^2) - log((y2 - y1)^2)")
            .free_mobility(false)
            .build(),
    );
    v.push(
        Builder::new("ex90-60b", "projective group of the conic x^2 + y^2 + 1 = 0", &XY, &["p + x^2*p + x*y*q", "q + x*y*p + y^2*q", "y*p - x*q"])
            .invariant("((x2 - x1)^2 + (y2 - y1)^2 + (x1*y2 - x2*y1)^2)/(1 + x1*x2 + y1*y2)^2")
            .free_mobility(true)
            .build(),
    );
    v.push(
        Builder::new("ex90-60c", "special linear group of the plane", &XY, &["x*q", "x*p - y*q", "y*p"])
            .invariant("x1*y2 - x2*y1")
            .free_mobility(false)
            .build(),
    );
    v.push(
        Builder::new("ex90-60d", "translations with a shearing scaling", &XY, &["p", "q", "x*p + (x + y)*q"])
            .invariant("(x2 - x1)*exp(-(y2 - y1)/(x2 - x1))")
            .free_mobility(false)
            .build(),
    );
    v.push(
        Builder::new("ex90-62a", "translations with a spiral rotation", &XY, &["p", "q", "y*p - x*q + c*(x*p + y*q)"])
            .param("c", Constraint::None, &["0"])
            .invariant("((x2 - x1)^2 + (y2 - y1)^2)*exp(2*c*atan((y2 - y1)/(x2 - x1)))")
            .free_mobility(true)
            .build(),
    );
    v.push(
        Builder::new("ex90-62b", "projective group of the circle x^2 + y^2 = 1", &XY, &["p - x^2*p - x*y*q", "q - x*y*p - y^2*q", "y*p - x*q"])
            .invariant("((x2 - x1)^2 + (y2 - y1)^2 - (x1*y2 - x2*y1)^2)/(1 - x1*x2 - y1*y2)^2")
            .free_mobility(true)
            .build(),
    );

    v.push(
        Builder::new("ex94-21", "transitive group whose reduced group has more pair invariants", &XYZ, &["q", "x*q + r", "x^2*q + 2*x*r", "x^3*q + 3*x^2*r", "x^4*q + 4*x^3*r", "p"])
            .invariant("x2 - x1")
            .essential(true)
            .reduced("ex94-21r")
            .build(),
    );
    v.push(
        Builder::new("ex94-21r", "reduced group of ex94-21", &XYZ, &["q", "r", "x*r", "p"])
            .pairs(2)
            .invariant("x2 - x1")
            .invariant("y2 - y1")
            .essential(true)
            .build(),
    );
    v.push(
        Builder::new("ex94-22", "group with an infinitesimal invariant but no pair invariant", &XYZ, &["q", "x*q + r", "x^2*q + 2*x*r", "x^3*q + 3*x^2*r", "p", "x*p - z*r"])
            .pairs(0)
            .essential(true)
            .infinitesimal_invariant("dy - z*dx")
            .reduced("ex94-22r")
            .build(),
    );
    v.push(
        Builder::new("ex94-22r", "reduced group of ex94-22", &XYZ, &["q", "r", "x*r", "p", "x*p - z*r"])
            .invariant("y2 - y1")
            .essential(true)
            .build(),
    );
    v.push(
        Builder::new("ex94-23", "second imprimitive family with one parameter", &XYZ, &["q", "p", "x*q + r", "x^2*q + 2*x*r", "x*p + y*q + c*r", "x^2*p + 2*x*y*q + 2*(c*x + y)*r"])
            .param("c", Constraint::None, &["0"])
            .invariant("z1 + z2 - c*log((x2 - x1)^2) - 2*(y2 - y1)/(x2 - x1)")
            .reduced("ex94-23r")
            .build(),
    );
    v.push(
        Builder::new("ex94-23r", "reduced group of ex94-23", &XYZ, &["q", "p", "r", "x*r", "x*p + y*q - c*x*q", "y*r"])
            .param("c", Constraint::None, &["0"])
            .invariant("(y2 - y1)/(x2 - x1) + c/2*log((x2 - x1)^2)")
            .build(),
    );
    v.push(
        Builder::new("ex94-24", "conformal planar group lifted by the logarithm of the scale", &XYZ, &["p", "q", "x*p + y*q + r", "y*p - x*q", "(x^2 - y^2)*p + 2*x*y*q + 2*x*r", "2*x*y*p + (y^2 - x^2)*q + 2*y*r"])
            .invariant("z1 + z2 - log((x2 - x1)^2 + (y2 - y1)^2)")
            .monodromy(true, two_point_motion(8.0))
            .reduced("ex94-24r")
            .build(),
    );
    v.push(
        Builder::new("ex94-24r", "reduced group of ex94-24", &XYZ, &["p", "q", "r", "y*p - x*q", "x*r", "y*r"])
            .invariant("(x2 - x1)^2 + (y2 - y1)^2")
            .monodromy(false, two_point_motion(100.0))
            .build(),
    );
    v.push(
        Builder::new("ex95-32", "real projective group of a conic without real points", &XY, &["p + x*(x*p + y*q)", "q + y*(x*p + y*q)", "y*p - x*q"])
            .invariant("((x2 - x1)^2 + (y2 - y1)^2 + (x1*y2 - x2*y1)^2)/(1 + x1*x2 + y1*y2)^2")
            .free_mobility(true)
            .build(),
    );
    v.push(
        Builder::new("ex101-dil", "translations and dilations of the plane", &XY, &["p", "q", "x*p + y*q"])
            .invariant("(y2 - y1)/(x2 - x1)")
            .arc_length(false)
            .free_mobility(false)
            .build(),
    );
    v.sort_by(|a, b| a.id.cmp(&b.id));
    v
}

pub fn find_entry(id: &str) -> Option<CatalogEntry> {
    builtin_entries().into_iter().find(|e| e.id == id)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: Value,
    pub observed: Value,
    pub status: String,
    pub diagnostics: String,
}

impl Check {
    fn new(name: String, expected: Value, observed: Value, diagnostics: String) -> Self {
        let status = if expected == observed { "pass" } else { "fail" };
        Check { name, expected, observed, status: status.into(), diagnostics }
    }

    fn error(name: String, expected: Value, diagnostics: String) -> Self {
        Check { name, expected, observed: Value::Null, status: "fail".into(), diagnostics }
    }

    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub entry: String,
    pub seed: u64,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

fn param_label(e: &CatalogEntry, p: &[Rational]) -> String {
    if p.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = e.params.iter().zip(p).map(|(n, v)| format!("{n}={v}")).collect();
    format!(" @ {}", parts.join(","))
}

/// Runs every applicable check on `e`; failures are recorded, never fatal.
pub fn verify_entry(e: &CatalogEntry, seed: u64) -> VerificationReport {
    let mut checks = Vec::new();
    let l = e.algebra();
    let sym = e.symbols();

    // closure and structure are checked once with symbolic parameters
    match algebra::check_closure(&l) {
        Ok(sc) => {
            checks.push(Check::new("closure".into(), json!(e.expected.closed), json!(true), format!("{} brackets", l.r() * (l.r() - 1) / 2)));
            let rep = algebra::verify_structure(&sc);
            let diag = rep.jacobi_violation.clone().map(|v| format!("{v:?}")).unwrap_or_default();
            checks.push(Check::new("structure".into(), json!(true), json!(rep.ok()), diag));
        }
        Err(err) => checks.push(Check::new("closure".into(), json!(e.expected.closed), json!(false), err.to_string())),
    }
    if let Some(rid) = &e.reduced {
        checks.push(reduced_check(&l, rid));
    }
    let pair_invs = e.pair_invariants();
    for (k, j) in pair_invs.iter().enumerate() {
        let name = format!("invariant[{k}]");
        let first = e.runs().into_iter().next().unwrap_or_default();
        match invariants::verify_joint_invariant(&l, j, 2, VerifyMode::Symbolic, &first, seed) {
            Ok(v) => {
                let diag = match &v {
                    Verdict::Refuted { generator, residual, .. } => format!("generator {} leaves {residual}", generator + 1),
                    Verdict::NumericallySupported { max_residual } => format!("max residual {max_residual:e}"),
                    Verdict::Proven => e.invariants[k].clone(),
                };
                checks.push(Check::new(name, json!("Proven"), json!(v.label()), diag));
            }
            Err(err) => checks.push(Check::error(name, json!("Proven"), err.to_string())),
        }
    }
    if let Some(w) = &e.expected.infinitesimal_invariant {
        let dsym = sym.with_differentials();
        match Expr::parse(w, &dsym) {
            Ok(we) => {
                let tests = invariants::verify_infinitesimal_invariant(&l, &we);
                let ok = tests.iter().all(|t| *t == ZeroTest::Yes);
                checks.push(Check::new("infinitesimal_invariant_verified".into(), json!(true), json!(ok), w.clone()));
            }
            Err(err) => checks.push(Check::error("infinitesimal_invariant_verified".into(), json!(true), err.to_string())),
        }
    }

    for p in e.runs() {
        let tag = param_label(e, &p);
        let exp = e.expected_at(&p).clone();
        let li = l.instantiate(&p);
        let transitive = algebra::is_transitive(&li, seed);
        checks.push(Check::new(format!("transitive{tag}"), json!(exp.transitive), json!(transitive), String::new()));
        let count = invariants::joint_invariant_count(&li, 2, seed);
        checks.push(Check::new(format!("pair_invariant_count{tag}"), json!(exp.pair_invariant_count), json!(count), String::new()));
        if let Some(want) = exp.two_point_criterion {
            let name = format!("two_point_criterion{tag}");
            match invariants::two_point_invariant_criterion(&li, seed) {
                Ok(rep) => {
                    let diag = format!("det = {}; minor nonzero: {}", rep.determinant, rep.minor_nonzero);
                    checks.push(Check::new(name, json!(want), json!(rep.passes), diag));
                }
                Err(err) => checks.push(Check::error(name, json!(want), err.to_string())),
            }
        }
        let mut used: Vec<Expr> = if count == 0 { vec![] } else { pair_invs.clone() };
        let pvals: Vec<Option<Expr>> = p.iter().map(|v| Some(Expr::constant(v.clone()))).collect();
        for (k, text) in e.sample_invariants.iter().filter(|(q, _)| *q == p).flat_map(|(_, v)| v).enumerate() {
            let name = format!("sample_invariant[{k}]{tag}");
            let parsed = Expr::parse(text, &sym.for_points(2)).map(|j| j.subst_params(&pvals));
            match parsed.map_err(|e| e.to_string()).and_then(|j| {
                invariants::verify_joint_invariant(&li, &j, 2, VerifyMode::Symbolic, &[], seed).map(|v| (j, v)).map_err(|e| e.to_string())
            }) {
                Ok((j, v)) => {
                    checks.push(Check::new(name, json!("Proven"), json!(v.label()), text.clone()));
                    used.push(j);
                }
                Err(err) => checks.push(Check::error(name, json!("Proven"), err)),
            }
        }
        let name = format!("essential_3pt{tag}");
        match invariants::essential_invariant_check(&li, 3, &used, &p, seed) {
            Ok(rep) => checks.push(Check::new(name, json!(exp.essential_3pt), json!(rep.essential), format!("3-point count {}, pulled-back rank {}", rep.count, rep.pullback_rank))),
            Err(err) => checks.push(Check::error(name, json!(exp.essential_3pt), err.to_string())),
        }
        let inf = invariants::infinitesimal_invariant_exists(&li, seed);
        let diag = format!("isotropy rank {}, prolonged rank {}, cross-check {}", inf.isotropy_rank, inf.prolonged_rank, inf.cross_check_agrees);
        checks.push(Check::new(format!("infinitesimal_invariant{tag}"), json!(exp.infinitesimal_exists), json!(inf.exists), diag));
        if let Some(want) = exp.arc_length {
            let got = invariants::arc_length_invariant_exists(&li, seed);
            checks.push(Check::new(format!("arc_length{tag}"), json!(want), json!(got), String::new()));
        }
        if let Some(want) = exp.free_mobility {
            let name = format!("free_mobility{tag}");
            match mobility::free_mobility_generic(&li, &[], seed) {
                Ok(v) => checks.push(Check::new(name, json!(want), json!(v.free_mobility), v.failing_stage.map(|s| format!("fails stage ({s})")).unwrap_or_default())),
                Err(err) => checks.push(Check::error(name, json!(want), err.to_string())),
            }
        }
        if let (Some(want), Some(setup)) = (exp.monodromy, &e.monodromy) {
            checks.push(monodromy_check(&li, setup, want, seed, &tag));
        }
    }
    VerificationReport { entry: e.id.clone(), seed, checks }
}

fn reduced_check(l: &LieAlgebra, rid: &str) -> Check {
    let name = format!("reduced_group = {rid}");
    let Some(target) = find_entry(rid) else {
        return Check::error(name, json!(true), "unknown entry".into());
    };
    let o = fields::origin(l.n());
    let red = algebra::reduced_algebra(l, &o);
    let t = target.algebra();
    let same = fields::spans_equal_over_constants(&red.gens, &t.gens, &o);
    Check::new(name, json!(true), json!(same), red.gen_strings().join(", "))
}

/// The motion fixing the setup's points, normalised to unit angular speed
/// where its linear part is a rotation.
pub fn fixed_point_motion(l: &LieAlgebra, setup: &MonodromySetup) -> Option<fields::VectorField> {
    let stab = flows::stabilizer_of_points(l, &setup.fixed);
    if stab.len() != 1 {
        return None;
    }
    let x = stab.into_iter().next().unwrap();
    Some(flows::normalize_rotation(&x, &setup.fixed[0], &[]).unwrap_or(x))
}

fn monodromy_check(l: &LieAlgebra, setup: &MonodromySetup, want: bool, seed: u64, tag: &str) -> Check {
    let name = format!("monodromy{tag}");
    let Some(x) = fixed_point_motion(l, setup) else {
        return Check::error(name, json!(want), "fixed points do not leave a one-parameter motion".into());
    };
    let starts = flows::sample_starts(&setup.center, setup.starts, setup.radius, seed);
    match flows::monodromy_period(&x, &starts, &[], setup.t_max, setup.steps, setup.tol) {
        Ok(rep) => {
            let diag = match rep.period {
                Some(t) => format!("period {t:.9} (2*pi = {:.9}) for {}", std::f64::consts::TAU, x.to_string_with(&l.sym)),
                None => format!("no common return up to t = {} for {}", setup.t_max, x.to_string_with(&l.sym)),
            };
            Check::new(name, json!(want), json!(rep.period.is_some()), diag)
        }
        Err(err) => Check::error(name, json!(want), err.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format {other:?}")),
        }
    }
}

pub fn export_report(reports: &[VerificationReport], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(reports).expect("serialisable") + "\n",
        Format::Text => {
            let mut out = String::new();
            for rep in reports {
                let status = if rep.passed() { "pass" } else { "FAIL" };
                out.push_str(&format!("{} (seed {}): {status}\n", rep.entry, rep.seed));
                for c in &rep.checks {
                    out.push_str(&format!("  [{}] {}: expected {}, observed {}", c.status, c.name, c.expected, c.observed));
                    if !c.diagnostics.is_empty() {
                        out.push_str(&format!("  ({})", c.diagnostics));
                    }
                    out.push('\n');
                }
            }
            out
        }
    }
}

/// Parameter values as floats, for flows.
pub fn float_params(p: &[Rational]) -> Vec<f64> {
    p.iter().map(to_f64).collect()
}
