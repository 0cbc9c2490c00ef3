//! One function per subcommand; each returns a report or a failure.

use perdec_core::cyclic::cyclic_hermite;
use perdec_core::roots::{count_inside, rational_roots};
use perdec_core::square::square_solvable;
use perdec_core::{
    build_cyclic, decouple_nonsquare, decouple_square, DecouplingInvariants, DecouplingReport, Error, FeedbackLaw,
    NonsquareOptions, PeriodicSystem, Q,
};

use crate::document::{DocumentError, Entry, SystemDocument};
use crate::report::{law, lists, Item, Report};

#[derive(Debug)]
pub enum Failure {
    Document(DocumentError),
    Core(Error),
    Usage(String),
    /// The verified law does not decouple the system; the report is still emitted.
    NotDecoupled(Report),
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        match e {
            DocumentError::System(e) => Failure::Core(e),
            e => Failure::Document(e),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

pub type Outcome = Result<Report, Failure>;

/// The document system with its stabilizing feedback applied, if any.
pub struct Loaded {
    pub raw: PeriodicSystem,
    pub stabilizing: Option<FeedbackLaw>,
    pub system: PeriodicSystem,
}

impl Loaded {
    pub fn new(doc: &SystemDocument) -> Result<Self, Failure> {
        let raw = doc.system()?;
        let stabilizing = doc.stabilizing_law()?;
        let system = match &stabilizing {
            Some(l) => raw.apply_feedback(l)?,
            None => raw.clone(),
        };
        Ok(Loaded { raw, stabilizing, system })
    }
}

fn system_matrices(sys: &PeriodicSystem) -> Report {
    let t = sys.period() as i64;
    let mut r = Report::new();
    r.put("A", (0..t).map(|k| sys.a(k).clone()).collect::<Vec<_>>())
        .put("B", (0..t).map(|k| sys.b(k).clone()).collect::<Vec<_>>())
        .put("C", (0..t).map(|k| sys.c(k).clone()).collect::<Vec<_>>())
        .put("D", (0..t).map(|k| sys.d(k).clone()).collect::<Vec<_>>());
    r
}

fn verification(report: &DecouplingReport, horizon: usize) -> Report {
    let mut r = Report::new();
    r.put("decoupled", report.is_decoupled())
        .put("diagonal", report.diagonal)
        .put("stable", report.stable)
        .put("output_reachable", report.output_reachable)
        .put("horizon", horizon);
    if let Some(o) = &report.offending {
        let mut off = Report::new();
        off.put("i", o.i).put("t", o.t).put("row", o.row).put("col", o.col);
        r.put("offending", off);
    }
    r
}

fn invariants_report(inv: &DecouplingInvariants) -> Report {
    let polys = |v: &[Vec<perdec_core::Poly>]| -> Item {
        Item::List(v.iter().map(|b| Item::List(b.iter().cloned().map(Item::Poly).collect())).collect())
    };
    let mut r = Report::new();
    r.put("d", polys(&inv.d))
        .put("delta", lists(&inv.delta))
        .put("f", polys(&inv.f))
        .put("phi", lists(&inv.phi))
        .put("sigma", lists(&inv.sigma))
        .put("sigma_free", lists(&inv.sigma_free))
        .put("interactor", inv.interactor.clone());
    r
}

pub fn analyze(loaded: &Loaded, tau: i64) -> Outcome {
    let sys = &loaded.system;
    let (psi, core) = loaded.raw.monodromy(tau);
    let chi = psi.char_poly();
    let mut r = Report::new();
    r.put("period", sys.period())
        .put("dims", sys.dims().to_vec())
        .put("inputs", sys.inputs())
        .put("outputs", sys.outputs())
        .put("tau", tau)
        .put("stable", loaded.raw.is_stable());
    let mut mono = Report::new();
    mono.put("matrix", psi)
        .put("core_dimension", core)
        .put("char_poly", chi.clone())
        .put("roots_inside_unit_circle", count_inside(&chi))
        .put("rational_roots", rational_roots(&chi));
    r.put("monodromy", mono);
    if let Some(l) = &loaded.stabilizing {
        r.put("stabilizing_law", law(l)).put("stabilized_stable", sys.is_stable());
    }
    let bundle = build_cyclic(sys, tau);
    let (p, t) = (sys.outputs(), sys.period());
    r.put("output_reachable", sys.output_reachable())
        .put("transfer_normal_rank", bundle.w_bar.normal_rank())
        .put("full_rank", p * t)
        .put("cyclic_transfer", bundle.w_bar.clone());
    match cyclic_hermite(&bundle) {
        Ok(h) => {
            if sys.inputs() == p {
                r.put("square_solvable", square_solvable(&h.result.h, p, t));
            }
            if sys.inputs() > p {
                match DecouplingInvariants::compute(&h.result.h, &bundle) {
                    Ok(inv) => r.put("invariants", invariants_report(&inv)),
                    Err(e) => r.put("invariants_error", e.to_string()),
                };
            }
        }
        Err(e) => {
            r.put("hermite_error", e.to_string());
        }
    }
    Ok(r)
}

pub fn hermite(loaded: &Loaded, tau: i64) -> Outcome {
    let bundle = build_cyclic(&loaded.system, tau);
    let h = cyclic_hermite(&bundle)?;
    let mut r = Report::new();
    r.put("tau", tau)
        .put("cyclic_transfer", bundle.w_bar.clone())
        .put("hermite_form", h.result.h.clone())
        .put("unimodular", h.result.u.clone())
        .put("skipped_reductions", h.skipped.len());
    Ok(r)
}

pub struct DecoupleArgs {
    pub tau: i64,
    pub horizon: Option<usize>,
    pub step10_bound: usize,
}

pub fn decouple(loaded: &Loaded, args: &DecoupleArgs) -> Outcome {
    let sys = &loaded.system;
    let (m, p) = (sys.inputs(), sys.outputs());
    let mut r = Report::new();
    if m < p {
        return Err(Error::NotSolvable(format!("{m} inputs cannot decouple {p} outputs")).into());
    }
    if !loaded.raw.is_stable() && loaded.stabilizing.is_none() {
        return Err(Error::NotStable.into());
    }
    if let Some(l) = &loaded.stabilizing {
        if !sys.is_stable() {
            return Err(Error::NotStable.into());
        }
        r.put("stabilizing_law", law(l));
    }
    let (decoupling_law, closed, report) = if m == p {
        let out = decouple_square(sys, args.tau, args.horizon)?;
        r.put("mode", "regular")
            .put("hermite_form", out.hermite.result.h.clone())
            .put("unimodular", out.hermite.result.u.clone());
        (out.realization.law.clone(), out.closed, out.report)
    } else {
        let opts = NonsquareOptions { tau: args.tau, horizon: args.horizon, step10_bound: args.step10_bound };
        let out = decouple_nonsquare(sys, &opts)?;
        let c = &out.candidates;
        let mut cand = Report::new();
        cand.put("epsilon", lists(&c.epsilon))
            .put("eta", lists(&c.eta))
            .put("eta_star", lists(&c.eta_star))
            .put("omega", lists(&c.omega));
        r.put("mode", "nonregular")
            .put("hermite_form", out.hermite.result.h.clone())
            .put("invariants", invariants_report(&out.invariants))
            .put("candidates", cand)
            .put("z1", out.parts.z1.clone())
            .put("compensator", out.parts.z_bar.clone())
            .put("nilpotent", out.nilpotent);
        (out.law, out.closed, out.report)
    };
    let composite = match &loaded.stabilizing {
        Some(l) => l.then(&decoupling_law)?,
        None => decoupling_law.clone(),
    };
    let horizon = args.horizon.unwrap_or_else(|| closed.default_horizon());
    r.put("decoupling_law", law(&decoupling_law))
        .put("law", law(&composite))
        .put("closed_loop", system_matrices(&closed))
        .put("closed_loop_transfer", build_cyclic(&closed, args.tau).w_bar)
        .put("verification", verification(&report, horizon));
    Ok(r)
}

pub fn verify(loaded: &Loaded, law_in: &FeedbackLaw, tau: i64, horizon: Option<usize>) -> Outcome {
    let closed = loaded.raw.apply_feedback(law_in)?;
    let report = closed.verify_decoupled(horizon);
    let h = horizon.unwrap_or_else(|| closed.default_horizon());
    let mut r = Report::new();
    r.put("verification", verification(&report, h))
        .put("closed_loop_transfer", build_cyclic(&closed, tau).w_bar);
    if report.is_decoupled() {
        Ok(r)
    } else {
        Err(Failure::NotDecoupled(r))
    }
}

pub enum Signal {
    Impulse(usize),
    Step(usize),
    Custom(Vec<Vec<Entry>>),
}

pub fn simulate(loaded: &Loaded, law_in: Option<&FeedbackLaw>, signal: &Signal, t0: i64, steps: usize) -> Outcome {
    let sys = match law_in {
        Some(l) => loaded.raw.apply_feedback(l)?,
        None => loaded.raw.clone(),
    };
    let width = sys.inputs();
    let unit = |j: usize| -> Result<Vec<Q>, Failure> {
        if j >= width {
            return Err(Failure::Usage(format!("channel {j} out of range, the system has {width} inputs")));
        }
        Ok((0..width).map(|k| Q::from_integer(i64::from(k == j).into())).collect())
    };
    let inputs: Vec<Vec<Q>> = match signal {
        Signal::Impulse(j) => std::iter::once(unit(*j)?).collect(),
        Signal::Step(j) => vec![unit(*j)?; steps],
        Signal::Custom(rows) => rows.iter().map(|r| r.iter().map(|e| e.0.clone()).collect()).collect(),
    };
    let x0 = vec![Q::from_integer(0.into()); sys.n(t0)];
    let ys = sys.simulate(&x0, &inputs, t0, steps)?;
    let mut table = Vec::with_capacity(steps);
    for (k, y) in ys.into_iter().enumerate() {
        let u = inputs.get(k).cloned().unwrap_or_else(|| vec![Q::from_integer(0.into()); width]);
        let mut row = Report::new();
        row.put("t", t0 + k as i64).put("u", u).put("y", y);
        table.push(Item::Map(row));
    }
    let mut r = Report::new();
    r.put("closed_loop", law_in.is_some()).put("t0", t0).put("steps", steps).put("response", Item::List(table));
    Ok(r)
}
