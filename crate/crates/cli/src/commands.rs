use std::fs::File;
use std::io::{self, Write};

use anyhow::{bail, Context, Result};
use derandom_core::classifiers::class_conditional_adv_risk;
use derandom_core::complexity::{
    approximation_experiment, dual_rademacher, dual_vc_bound_check, massart_bound_check, sauer_check,
    ClassifierTuple, RademacherMode, RademacherValue, RangeSpace, MAX_EXACT_RADEMACHER_K,
};
use derandom_core::derandomize::{attack_argmax_inclusion_check, integral_identity, mc_levelset_identity, risk_profile, BinomialParams};
use derandom_core::games::{solve_zero_sum_exact, solve_zero_sum_iterative, ApproxEquilibrium};
use derandom_core::instances::{linear_example_report, three_line_regions, warm_up_report};
use derandom_core::io::{load_json, ClassifierDoc, FamilyDoc, GameDoc, InstanceDoc, LoadedClassifier, LoadedInstance, MixtureDoc};
use derandom_core::mixtures::{
    adv_risk_decomposition, closed_family_dominance_check, closure_under_union_intersection, ensemble_expansion_identity, natural_risk,
    uniform_decomposition, Mixture,
};
use derandom_core::random::{self, random_deterministic, random_instance, random_randomized};
use derandom_core::report::{decimal, decomposition_table, equilibrium_table, exact_fields, fraction, profile_table, smoothing_table, Table};
use derandom_core::smoothing::{rs_dominance_report, NoiseKernel};
use derandom_core::{adv_risk, Error, Label, Neighborhoods, Rational, Scalar};
use log::info;
use rand::Rng;

use crate::{Command, Outcome, Settings};

const DEFAULT_INSTANCES: usize = 200;
const DEFAULT_Q_SAMPLES: usize = 20;
const DEFAULT_K: usize = 8;
const DEFAULT_TRIALS: usize = 200;
const GAME_TOLERANCE: f64 = 1e-6;
const GAME_MAX_ITERS: usize = 2_000_000;
const RADEMACHER_SAMPLES: usize = 20_000;

pub fn run(command: Command, s: &Settings) -> Result<Outcome> {
    match command {
        Command::Risk => risk(s),
        Command::Derandomize => derandomize(s),
        Command::MixtureDecompose => mixture_decompose(s),
        Command::SmoothingCompare => smoothing_compare(s),
        Command::Game => game(s),
        Command::Complexity => complexity(s),
        Command::PaperExamples => worked_examples(s),
        Command::Verify => verify(s),
    }
}

fn emit(s: &Settings, table: &Table) -> Result<()> {
    match &s.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            table.write_csv(file)?;
            info!("wrote {}", path.display());
        }
        None => table.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn instance(s: &Settings) -> Result<(LoadedInstance, Neighborhoods)> {
    let path = s.input("instance", &s.config.instance)?;
    let inst = load_json::<InstanceDoc>(&path)?.load().with_context(|| format!("instance {}", path.display()))?;
    let eps = s.config.eps.or(inst.eps).context("no radius: pass --eps or set \"eps\" in the config or instance")?;
    let nbhd = inst.space.neighborhoods(eps)?;
    Ok((inst, nbhd))
}

fn classifier(s: &Settings, n: usize) -> Result<LoadedClassifier> {
    let path = s.input("classifier", &s.config.classifier)?;
    let c = load_json::<ClassifierDoc>(&path)?.load().with_context(|| format!("classifier {}", path.display()))?;
    if c.len() != n {
        return Err(Error::DomainMismatch { expected: n, found: c.len() }.into());
    }
    Ok(c)
}

fn risk(s: &Settings) -> Result<Outcome> {
    let (inst, nbhd) = instance(s)?;
    let h = classifier(s, inst.space.len())?.to_randomized();
    let mut t = Table::new(["quantity", "risk_num", "risk_den", "risk_decimal"]);
    let mut push = |name: &str, r: &Rational| {
        let [n, d, x] = exact_fields(r);
        t.push([name.to_string(), n, d, x]);
    };
    push("adv_risk", &adv_risk(&h, &inst.dist, &nbhd)?);
    push("natural_risk", &natural_risk(&h, &inst.dist)?);
    for y in Label::BOTH {
        if inst.dist.marginal(y) > Rational::ratio(0, 1) {
            push(&format!("adv_risk_given_{y}"), &class_conditional_adv_risk(&h, &inst.dist, &nbhd, y)?);
        }
    }
    emit(s, &t)?;
    Ok(Outcome::Ok)
}

fn derandomize(s: &Settings) -> Result<Outcome> {
    let (inst, nbhd) = instance(s)?;
    let h = classifier(s, inst.space.len())?.to_randomized();
    let profile = risk_profile(&h, &inst.dist, &nbhd)?;
    let identity = integral_identity(&h, &inst.dist, &nbhd)?;
    emit(s, &profile_table(&profile, &identity))?;
    Ok(if identity.equal {
        Outcome::Ok
    } else {
        Outcome::PropertyViolation(format!("risk {} differs from profile integral {}", identity.lhs, identity.rhs))
    })
}

fn mixture_decompose(s: &Settings) -> Result<Outcome> {
    let (inst, nbhd) = instance(s)?;
    let path = s.input("mixture", &s.config.mixture)?;
    let mix = load_json::<MixtureDoc>(&path)?.load().with_context(|| format!("mixture {}", path.display()))?;
    if mix.components()[0].len() != inst.space.len() {
        return Err(Error::DomainMismatch { expected: inst.space.len(), found: mix.components()[0].len() }.into());
    }
    let dec = adv_risk_decomposition(&mix, &inst.dist, &nbhd)?;
    emit(s, &decomposition_table(&dec))?;
    Ok(if dec.identity.equal {
        Outcome::Ok
    } else {
        Outcome::PropertyViolation(format!("mixture risk {} differs from decomposition {}", dec.identity.lhs, dec.identity.rhs))
    })
}

fn smoothing_compare(s: &Settings) -> Result<Outcome> {
    let (inst, nbhd) = instance(s)?;
    let f = match classifier(s, inst.space.len())? {
        LoadedClassifier::Deterministic(f) => f,
        LoadedClassifier::Randomized(_) => bail!("smoothing-compare needs a deterministic classifier (\"labels\")"),
    };
    let kernel = s.config.kernel.as_ref().context("config field \"kernel\" is required for this command")?.load(&inst.space)?;
    let rep = rs_dominance_report(&f, &kernel, &inst.dist, &nbhd)?;
    emit(s, &smoothing_table(&rep))?;
    Ok(if rep.dominates() {
        Outcome::Ok
    } else {
        Outcome::PropertyViolation(format!("best threshold risk {} exceeds noise-injection risk {}", rep.best_risk, rep.ni_risk))
    })
}

fn approx_table(eq: &ApproxEquilibrium) -> Table {
    let mut t = Table::new(["kind", "index", "probability_decimal", "bound_decimal"]);
    t.push(["lower".to_string(), String::new(), String::new(), eq.lower.to_string()]);
    t.push(["upper".to_string(), String::new(), String::new(), eq.upper.to_string()]);
    for (i, p) in eq.row_strategy.iter().enumerate() {
        t.push(["row".to_string(), i.to_string(), p.to_string(), String::new()]);
    }
    for (j, p) in eq.col_strategy.iter().enumerate() {
        t.push(["col".to_string(), j.to_string(), p.to_string(), String::new()]);
    }
    t
}

fn game(s: &Settings) -> Result<Outcome> {
    let path = s.input("game", &s.config.game)?;
    let g = load_json::<GameDoc>(&path)?.load().with_context(|| format!("game {}", path.display()))?;
    match solve_zero_sum_exact(&g) {
        Ok(eq) => {
            emit(s, &equilibrium_table(&eq))?;
            Ok(if eq.verify(&g) { Outcome::Ok } else { Outcome::PropertyViolation("equilibrium certificate fails".into()) })
        }
        Err(Error::CapExceeded { what, cap, got }) => {
            info!("{what} {got} exceeds the exact cap {cap}; using the iterative solver");
            let eq = solve_zero_sum_iterative(&g, GAME_TOLERANCE, GAME_MAX_ITERS)?;
            emit(s, &approx_table(&eq))?;
            Ok(Outcome::Ok)
        }
        Err(e) => Err(e.into()),
    }
}

fn complexity(s: &Settings) -> Result<Outcome> {
    let path = s.input("family", &s.config.family)?;
    let family = load_json::<FamilyDoc>(&path)?.load().with_context(|| format!("family {}", path.display()))?;
    if family.is_empty() {
        bail!("family is empty");
    }
    let mut t = Table::new(["quantity", "value", "bound", "holds"]);
    let mut violations = Vec::new();
    let mut check = |t: &mut Table, name: &str, value: String, bound: String, holds: bool| {
        if !holds {
            violations.push(name.to_string());
        }
        t.push([name.to_string(), value, bound, holds.to_string()]);
    };

    let space = RangeSpace::from_classifiers(&family)?;
    let (vc, dual_vc, dual_ok) = dual_vc_bound_check(&space)?;
    t.push(["vc".to_string(), vc.to_string(), String::new(), String::new()]);
    check(&mut t, "dual_vc", dual_vc.to_string(), (2u64 << vc).to_string(), dual_ok);
    check(&mut t, "sauer", String::new(), String::new(), sauer_check(&space)?);

    let tuple = ClassifierTuple::new(family.clone(), Label::Zero)?;
    let mode = if tuple.k() <= MAX_EXACT_RADEMACHER_K {
        RademacherMode::Exact
    } else {
        RademacherMode::MonteCarlo { samples: RADEMACHER_SAMPLES, seed: s.seed()? }
    };
    match dual_rademacher(&tuple, mode)? {
        RademacherValue::Exact(r) => {
            t.push(["dual_rademacher".to_string(), fraction(&r), String::new(), String::new()]);
            t.push(["dual_rademacher_decimal".to_string(), decimal(&r), String::new(), String::new()]);
            let m = massart_bound_check(&tuple)?;
            check(&mut t, "massart", decimal(&m.value), m.bound.to_string(), m.holds);
        }
        RademacherValue::Estimate(v) => t.push(["dual_rademacher_estimate".to_string(), v.to_string(), String::new(), String::new()]),
    }

    if s.config.instance.is_some() {
        let (inst, nbhd) = instance(s)?;
        if family[0].len() != inst.space.len() {
            return Err(Error::DomainMismatch { expected: inst.space.len(), found: family[0].len() }.into());
        }
        let k = s.config.max_k.unwrap_or(DEFAULT_K);
        let trials = s.config.trials.unwrap_or(DEFAULT_TRIALS);
        let r = approximation_experiment(&family, &inst.dist, &nbhd, k, trials, s.seed()?)?;
        t.push(["mu_risk".to_string(), decimal(&r.mu_risk), String::new(), String::new()]);
        check(&mut t, "min_trial_risk_vs_vc_bound", decimal(&r.min_trial_risk), r.vc_bound.to_string(), r.vc_bound_holds);
        t.push([
            "min_trial_risk_vs_rademacher_bound".to_string(),
            decimal(&r.min_trial_risk),
            r.rademacher_bound.to_string(),
            r.rademacher_bound_holds.to_string(),
        ]);
        let two_rad = (2.0 * r.mean_rademacher).to_string();
        check(&mut t, "sample_excess_deviation", r.sample_excess.mean.to_string(), two_rad.clone(), r.sample_excess.holds);
        check(&mut t, "mu_excess_deviation", r.mu_excess.mean.to_string(), two_rad.clone(), r.mu_excess.holds);
        // reported only: the absolute form is not implied by the symmetrization argument
        t.push(["absolute_deviation".to_string(), r.absolute.mean.to_string(), two_rad, r.absolute.holds.to_string()]);
    }
    emit(s, &t)?;
    Ok(if violations.is_empty() { Outcome::Ok } else { Outcome::PropertyViolation(violations.join(", ")) })
}

fn worked_examples(s: &Settings) -> Result<Outcome> {
    let w = warm_up_report()?;
    let l = linear_example_report(100_000)?;
    let regions = three_line_regions()?;
    let mut out = io::stdout().lock();
    writeln!(out, "warm-up: pure risks {}, {}; mixture {}; game value {}", w.pure_risks[0], w.pure_risks[1], w.mixture_risk, w.game_value)?;
    writeln!(out, "linear: risks {}, {}; mixture {}", l.risk_f1, l.risk_f2, l.mixture_risk)?;
    writeln!(out, "regions: {regions}")?;

    let mut t = Table::new(["example", "quantity", "value", "expected", "matches"]);
    let mut mismatches = Vec::new();
    let mut row = |ex: &str, q: &str, value: String, expected: &str| {
        let ok = value == expected;
        if !ok {
            mismatches.push(format!("{ex} {q}: {value} != {expected}"));
        }
        t.push([ex.to_string(), q.to_string(), value, expected.to_string(), ok.to_string()]);
    };
    row("warm-up", "pure_risk_f1", w.pure_risks[0].to_string(), "1");
    row("warm-up", "pure_risk_f2", w.pure_risks[1].to_string(), "1");
    row("warm-up", "mixture_risk", w.mixture_risk.to_string(), "1/2");
    row("warm-up", "game_value", w.game_value.to_string(), "1/2");
    row("warm-up", "row_strategy", format!("{}|{}", w.row_strategy[0], w.row_strategy[1]), "1/2|1/2");
    row("linear", "risk_f1", l.risk_f1.to_string(), "1/3");
    row("linear", "risk_f2", l.risk_f2.to_string(), "1/3");
    row("linear", "mixture_risk", l.mixture_risk.to_string(), "1/4");
    let losses: Vec<String> = l.mixture_losses.iter().map(|x| x.to_string()).collect();
    row("linear", "mixture_losses", losses.join("|"), "0|1/2|1/2|1/2");
    row("linear", "pair_distance_exceeds_eps", (l.pair_attack_distance > 1.0).to_string(), "true");
    row("linear", "no_robust_classifier_left", l.impossible_left.to_string(), "true");
    row("linear", "no_robust_classifier_right", l.impossible_right.to_string(), "true");
    row("linear", "robust_classifier_at_eps_0.1", l.relaxed_feasible.to_string(), "true");
    row("lines", "regions", regions.to_string(), "7");
    if s.out.is_some() {
        emit(s, &t)?;
    }
    Ok(if mismatches.is_empty() { Outcome::Ok } else { Outcome::ReferenceMismatch(mismatches.join("; ")) })
}

/// Failure count per named property.
struct Tally(Vec<(&'static str, usize, usize)>);

impl Tally {
    fn record(&mut self, name: &'static str, ok: bool) {
        let entry = match self.0.iter().position(|(n, _, _)| *n == name) {
            Some(i) => &mut self.0[i],
            None => {
                self.0.push((name, 0, 0));
                self.0.last_mut().expect("just pushed")
            }
        };
        entry.1 += 1;
        entry.2 += usize::from(!ok);
    }
}

fn verify(s: &Settings) -> Result<Outcome> {
    let seed = s.seed()?;
    let count = s.config.instances.unwrap_or(DEFAULT_INSTANCES);
    let max_m = s.config.max_m.unwrap_or(6);
    let q_samples = s.config.q_samples.unwrap_or(DEFAULT_Q_SAMPLES);
    if max_m == 0 || max_m > derandom_core::mixtures::MAX_ALPHA_COMPONENTS {
        bail!("max_m must be in 1..={}", derandom_core::mixtures::MAX_ALPHA_COMPONENTS);
    }
    let mut rng = random::rng(seed);
    let mut tally = Tally(Vec::new());
    for i in 0..count {
        let inst = random_instance::<Rational, _>(&mut rng, 8);
        let n = inst.space.len();
        let h = random_randomized::<Rational, _>(&mut rng, n, 20);
        tally.record("integral_identity", integral_identity(&h, &inst.dist, &inst.nbhd)?.equal);
        tally.record(
            "attack_argmax_inclusion",
            inst.dist.atoms().iter().all(|a| attack_argmax_inclusion_check(&h, &inst.nbhd, a.point, a.label)),
        );
        let kk = rng.gen_range(1..=6u32);
        let params = BinomialParams::new(kk, rng.gen_range(0..kk))?;
        let alpha = Rational::ratio(rng.gen_range(0..=16), 16);
        tally.record("monte_carlo_level_set", mc_levelset_identity(&h, params, &alpha)?);

        let m = rng.gen_range(1..=max_m);
        let comps: Vec<_> = (0..m).map(|_| random_deterministic(&mut rng, n)).collect();
        let mix = Mixture::new(comps.clone(), random::random_weights(&mut rng, m, 12))?;
        tally.record("mixture_decomposition", adv_risk_decomposition(&mix, &inst.dist, &inst.nbhd)?.identity.equal);
        tally.record("ensemble_expansion", ensemble_expansion_identity(&mix, &inst.space, inst.eps)?);
        let uniform = Mixture::uniform(comps.clone())?;
        tally.record("uniform_decomposition", uniform_decomposition(&uniform, &inst.dist, &inst.nbhd)?.identity.equal);

        let kernel = NoiseKernel::new(random::random_stochastic_rows(&mut rng, n, 6))?;
        tally.record("smoothing_dominance", rs_dominance_report(&comps[0], &kernel, &inst.dist, &inst.nbhd)?.dominates());

        let family = closure_under_union_intersection(&comps[..comps.len().min(4)])?;
        tally.record("closed_family_dominance", closed_family_dominance_check(&family, &inst.dist, &inst.nbhd, q_samples, rng.gen())?.holds());
        if (i + 1) % 50 == 0 {
            info!("verified {} of {count} instances", i + 1);
        }
    }
    let mut t = Table::new(["property", "instances", "failures"]);
    let mut failed = Vec::new();
    for (name, total, failures) in &tally.0 {
        if *failures > 0 {
            failed.push(format!("{name} ({failures}/{total})"));
        }
        t.push([name.to_string(), total.to_string(), failures.to_string()]);
    }
    emit(s, &t)?;
    Ok(if failed.is_empty() { Outcome::Ok } else { Outcome::PropertyViolation(failed.join(", ")) })
}
