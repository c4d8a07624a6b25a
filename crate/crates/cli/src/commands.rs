use crate::config::*;
use crate::report::{CliError, Output};
use pretlab::applications::{
    brudern_predict, discrepancy, ect_characterize, g_properties_check, katai_report, second_moment, EctStatus, SigmaReading,
};
use pretlab::arith::FactorSieve;
use pretlab::correlation::{correlate_multi, predict_char_shift, predict_linear_corr, predict_poly_corr, LinearForms, MultiTerm};
use pretlab::meanvalue::{adversarial_mean, dependence_demo, mean_value_report};
use pretlab::multfun::{distance, distance_poly, make_mult_func, pretentious_scan, DirichletCharacter, MultFunc};
use pretlab::par::Exec;
use pretlab::poly::{large_prime_powers, omega_prime_power, roots_prime_power, PolynomialZ};
use pretlab::selftest::{self, Fault, SelftestOptions};
use pretlab::{Complex64, Error};
use serde::Serialize;
use serde_json::json;

type Res = Result<Output, CliError>;

/// A sieve covering `required`, refused when that exceeds the configured limit.
fn sieve_for(required: u64, limit: u64) -> Result<FactorSieve, Error> {
    if required > limit {
        return Err(Error::OutOfRange {
            what: "x",
            value: required as u128,
            limit: limit as u128,
        });
    }
    FactorSieve::new(required.max(2))
}

fn character(q: u64, index: u64) -> Result<DirichletCharacter, Error> {
    DirichletCharacter::new(q, index)
        .ok_or_else(|| Error::InvalidArgument(format!("no character with index {index} modulo {q}")))
}

pub fn execute(command: &Command, limit: u64, exec: Exec) -> Res {
    match command {
        Command::Meanvalue(a) => meanvalue(a, limit, exec),
        Command::Correlate(a) => correlate(a, limit, exec),
        Command::CharShift(a) => char_shift(a, limit, exec),
        Command::Omega(a) => omega(a),
        Command::Distance(a) => distance_cmd(a, limit, exec),
        Command::Ect(a) => ect(a, limit, exec),
        Command::Katai(a) => katai(a, limit, exec),
        Command::Brudern(a) => brudern(a, limit, exec),
        Command::Adversary(a) => adversary(a, limit, exec),
        Command::Multi(a) => multi(a, limit, exec),
        Command::Selftest(a) => selftest_cmd(a, limit, exec),
        Command::Rerun(_) => Err(CliError::Usage("a report cannot embed another rerun".into())),
    }
}

fn meanvalue(a: &MeanvalueArgs, limit: u64, exec: Exec) -> Res {
    let f = make_mult_func(&a.f)?;
    let poly = PolynomialZ::parse(&a.p)?;
    let product_limit = a.product_limit.unwrap_or(a.x);
    let sieve = sieve_for(a.x.max(product_limit), limit)?;
    let r = mean_value_report(&f, &poly, a.x, product_limit, !a.no_direct, &sieve, exec)?;
    let factors: Vec<_> = r.factors.iter().map(|l| (l.p, l.value)).collect();
    let gap = r.direct.map(|d| (d - r.prediction).norm());
    Ok(Output::new(&r)?
        .factors(factors)
        .complex("prediction", r.prediction)
        .maybe("direct", r.direct.map(|d| d.re))
        .maybe("gap", gap)
        .real("error_budget", r.error_budget))
}

fn correlation_output(r: &pretlab::correlation::CorrelationReport) -> Res {
    let mut out = Output::new(r)?
        .factors(r.local_factors.iter().copied())
        .complex("prediction", r.prediction);
    if let Some(d) = r.direct {
        out = out.complex("direct", d);
    }
    Ok(out.maybe("gap", r.gap()).maybe("form_gap", r.form_gap).real("tail_bound", r.tail_bound))
}

fn correlate(a: &CorrelateArgs, limit: u64, exec: Exec) -> Res {
    let f = make_mult_func(&a.f)?;
    let g = match &a.g {
        Some(spec) => make_mult_func(spec)?,
        None => f.clone(),
    };
    let pp = PolynomialZ::parse(&a.p)?;
    let qq = PolynomialZ::parse(&a.q)?;
    let sieve = sieve_for(a.x, limit)?;
    let linear = pp.degree() == 1 && qq.degree() == 1 && pp.leading() > 0 && qq.leading() > 0;
    let use_linear = match a.route {
        Route::Auto => linear,
        Route::Linear if !linear => {
            return Err(CliError::Usage("the linear route needs two forms a*x+c with a > 0".into()));
        }
        Route::Linear => true,
        Route::Poly => false,
    };
    let r = if use_linear {
        let forms = LinearForms::new(pp.leading(), pp.coeffs()[0], qq.leading(), qq.coeffs()[0])?;
        predict_linear_corr(&f, &g, &forms, a.t, a.u, a.x, !a.no_direct, &sieve, exec)?
    } else {
        predict_poly_corr(&f, &g, &pp, &qq, a.t, a.u, a.x, !a.no_direct, &sieve, exec)?
    };
    correlation_output(&r)
}

fn char_shift(a: &CharShiftArgs, limit: u64, exec: Exec) -> Res {
    let f = make_mult_func(&a.f)?;
    let chi = character(a.q, a.chi)?;
    let sieve = sieve_for(a.x, limit)?;
    let r = predict_char_shift(&f, &chi, a.t, a.d, a.x, !a.no_direct, &sieve, exec)?;
    correlation_output(&r)
}

fn omega(a: &OmegaArgs) -> Res {
    let poly = PolynomialZ::parse(&a.p_poly)?;
    let count = omega_prime_power(&poly, a.p, a.k)?;
    let roots = if a.list { Some(roots_prime_power(&poly, a.p, a.k)?) } else { None };
    let result = json!({ "P": poly.to_string(), "p": a.p, "k": a.k, "omega": count, "roots": roots });
    Ok(Output::new(result)?.real("omega", count as f64))
}

#[derive(Serialize)]
struct ScanOut {
    q: u64,
    index: u64,
    conductor: u64,
    t: f64,
    distance: f64,
}

fn distance_cmd(a: &DistanceArgs, limit: u64, exec: Exec) -> Res {
    let f = make_mult_func(&a.f)?;
    let g = make_mult_func(&a.g)?;
    let sieve = sieve_for(a.x, limit)?;
    let xf = a.x as f64;
    let value = match &a.p {
        Some(text) => {
            let poly = PolynomialZ::parse(text)?;
            let large = large_prime_powers(&poly, a.x, None, exec)?;
            distance_poly(&f, &g, a.y, xf, &large, a.starred, &sieve)?
        }
        None => distance(&f, &g, a.y, xf, &sieve)?,
    };
    let scan = match a.scan_q {
        Some(q_max) => {
            let s = pretentious_scan(&f, q_max, &a.t_grid, a.x, &sieve)?;
            Some(ScanOut {
                q: s.character.modulus(),
                index: s.character.index(),
                conductor: s.character.conductor(),
                t: s.t,
                distance: s.distance.value,
            })
        }
        None => None,
    };
    let mut out = Output::new(json!({ "f": f.name(), "g": g.name(), "distance": value, "scan": scan }))?.real("distance", value.value);
    if let Some(s) = &scan {
        out = out.real("scan_distance", s.distance).real("scan_q", s.q as f64).real("scan_t", s.t);
    }
    Ok(out)
}

fn ect(a: &EctArgs, limit: u64, exec: Exec) -> Res {
    let f = make_mult_func(&a.f)?;
    let sieve = sieve_for(a.x.max(a.m.saturating_mul(a.m)), limit)?;
    let verdict = ect_characterize(&f, a.m, &sieve, exec)?;
    let disc = discrepancy(&f, a.x, exec)?;
    let minus_at_two = (1..=8).all(|k| (f.at(2, k) + 1.0).norm() <= 1e-12);
    let g_props = if minus_at_two { Some(g_properties_check(&f, a.x, &sieve)?) } else { None };
    let moments = if a.h_max > 0 {
        let hs: Vec<u64> = (1..=a.h_max).collect();
        Some(second_moment(&f, &hs, a.x, &sieve, exec)?)
    } else {
        None
    };
    let bounded = verdict.period_m.map(|m| disc <= m as f64);
    let mut out = Output::new(json!({
        "verdict": verdict,
        "discrepancy": disc,
        "discrepancy_within_period": bounded,
        "g_properties": g_props,
        "second_moments": moments,
    }))?
    .real("satisfied", f64::from(u8::from(verdict.status == EctStatus::Satisfied)))
    .maybe("period", verdict.period_m.map(|m| m as f64))
    .real("discrepancy", disc);
    for m in moments.iter().flatten() {
        out = out.real(&format!("moment_h{}_empirical", m.h), m.empirical).real(&format!("moment_h{}_predicted", m.h), m.predicted);
    }
    Ok(out)
}

fn katai(a: &KataiArgs, limit: u64, exec: Exec) -> Res {
    let f = make_mult_func(&a.f)?;
    let chi = character(a.q, a.chi)?;
    let sieve = sieve_for(a.x, limit)?;
    let r = katai_report(&f, &chi, a.t, a.x, &sieve, exec)?;
    Ok(Output::new(&r)?
        .complex("energy", r.energy)
        .real("coefficient_pred", r.coefficient_pred)
        .real("coefficient_emp", r.coefficient_emp)
        .real("gap", r.gap()))
}

fn brudern(a: &BrudernArgs, limit: u64, exec: Exec) -> Res {
    let set_a = make_mult_func(&a.a)?;
    let set_b = match &a.b {
        Some(spec) => make_mult_func(spec)?,
        None => set_a.clone(),
    };
    let sieve = sieve_for(a.n, limit)?;
    let reading = match a.reading {
        Reading::Printed => SigmaReading::Printed,
        Reading::Normalized => SigmaReading::Normalized,
    };
    let r = brudern_predict(&set_a, &set_b, a.n, reading, &sieve, exec)?;
    let factors: Vec<_> = r.sigma_factors.iter().map(|s| (s.p, Complex64::new(s.factor, 0.0))).collect();
    Ok(Output::new(&r)?
        .factors(factors)
        .real("r_direct", r.r_direct as f64)
        .real("r_pred_g", r.r_pred_g)
        .real("r_pred_sigma", r.r_pred_sigma)
        .real("relative_gap", r.relative_gap()))
}

fn adversary(a: &AdversaryArgs, limit: u64, exec: Exec) -> Res {
    if let Some(levels) = a.levels {
        let rows = dependence_demo(levels, exec)?;
        let mut out = Output::new(&rows)?;
        for row in &rows {
            out = out.real(&format!("level{}_mean_abs", row.level), row.mean_abs);
        }
        return Ok(out);
    }
    sieve_for(a.x, limit)?;
    let base: MultFunc = make_mult_func(&a.base)?;
    let poly = PolynomialZ::parse(&a.p)?;
    let r = adversarial_mean(&poly, a.x, &base, exec)?;
    Ok(Output::new(&r)?
        .real("achieved_mean", r.achieved_mean)
        .real("predicted_mean", r.predicted_mean)
        .real("steered_fraction", r.steered_fraction))
}

fn parse_term(text: &str) -> Result<MultiTerm, Error> {
    let parts: Vec<&str> = text.split('|').map(str::trim).collect();
    let bad = |reason: &str| Error::MalformedSpec {
        input: text.to_string(),
        reason: reason.to_string(),
    };
    if !(3..=4).contains(&parts.len()) {
        return Err(bad("expected \"SPEC | a | b\" or \"SPEC | a | b | t\""));
    }
    let int = |s: &str| s.parse::<i64>().map_err(|_| bad("a and b must be integers"));
    let t = match parts.get(3) {
        Some(s) => s.parse::<f64>().map_err(|_| bad("t must be a real number"))?,
        None => 0.0,
    };
    Ok(MultiTerm {
        f: make_mult_func(parts[0])?,
        t,
        a: int(parts[1])?,
        b: int(parts[2])?,
    })
}

fn multi(a: &MultiArgs, limit: u64, exec: Exec) -> Res {
    let terms: Vec<MultiTerm> = a.terms.iter().map(|t| parse_term(t)).collect::<Result<_, _>>()?;
    let sieve = sieve_for(a.x, limit)?;
    let r = correlate_multi(&terms, a.x, !a.no_direct, &sieve, exec)?;
    correlation_output(&r)
}

fn selftest_cmd(a: &SelftestArgs, limit: u64, exec: Exec) -> Res {
    let options = SelftestOptions {
        x: a.x,
        sieve_limit: limit,
        fault: a.inject_fault.map(|InjectFault::GSign| Fault::GSign),
    };
    let r = selftest::run(&options, exec)?;
    for failure in r.failures() {
        eprintln!("FAIL {failure}");
    }
    let exit_code = if r.passed() {
        0
    } else if r.only_precondition_failures() {
        2
    } else {
        1
    };
    let passed = r.checks.iter().filter(|c| c.passed).count();
    let mut out = Output::new(&r)?.real("passed", passed as f64).real("failed", (r.checks.len() - passed) as f64);
    out.exit_code = exit_code;
    Ok(out)
}
