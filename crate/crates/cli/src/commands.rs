use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use cknscope::criterion::{
    cube_points, epsilon_curve, iterate_y, scan_grid, theorem1_trace, theorem2_trace, CriterionId, CriterionSpec,
    LadderSpec, ScanPoint,
};
use cknscope::flowfield::{
    load_flow, make_beltrami_flow, make_random_divfree_flow, make_selfsimilar_fixture, make_shear_flow, save_flow, GridSpec,
};
use cknscope::harness::exponents::{alpha, beta};
use cknscope::harness::suite::{compare_baseline, pressure_constants, SuiteSpec};
use cknscope::harness::{fit_constants, ConstantFit, LemmaId, VerificationReport};
use cknscope::report::{
    write_checks_csv, write_epsilon_curve_csv, write_fits_csv, write_functionals_csv, write_iteration_csv, write_json,
    write_scan_csv, write_theorem1_csv, write_theorem2_csv, Parameters,
};
use cknscope::{Error, FunctionalParams, Functionals, Resolution, Result, SampledFlow};

use crate::args::{Command, Format, FunctionalsCmd, GenCmd, GenSpec, Kind, Output, ScanCmd, Source, TraceCmd, VerifyCmd};

pub fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Gen(c) => gen(c),
        Command::Functionals(c) => functionals(c),
        Command::Verify(c) => verify(c),
        Command::Scan(c) => scan(c),
        Command::Trace(c) => trace(c),
    }
}

fn sink(out: &Option<std::path::PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn generator_params(g: &GenSpec, kind: Kind) -> Parameters {
    let mut p = Parameters::new();
    p.push("kind", format!("{kind:?}").to_lowercase())
        .push("n", g.n)
        .push("box_length", g.box_length.unwrap_or(std::f64::consts::TAU))
        .push("n_times", g.n_times)
        .push("t0", g.t0)
        .push("t1", g.t1);
    match kind {
        Kind::Shear => {}
        Kind::Beltrami => {
            p.push("amplitudes", join(&g.amplitudes)).push("viscosity", g.viscosity);
        }
        Kind::Random => {
            p.push("seed", g.seed).push("kmax", g.kmax).push("amplitude", g.amplitude);
        }
        Kind::Selfsimilar => {
            p.push("blowup_time", g.blowup_time).push("profile_scale", g.profile_scale);
        }
    }
    p
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn generate(g: &GenSpec) -> Result<(SampledFlow, Parameters)> {
    let kind = g.kind.ok_or_else(|| Error::InvalidParameter("one of --flow or --kind is required".into()))?;
    let grid = GridSpec::new(g.n, g.box_length.unwrap_or(std::f64::consts::TAU), g.n_times, g.t0, g.t1)?;
    let flow = match kind {
        Kind::Shear => make_shear_flow(grid)?,
        Kind::Beltrami => {
            let a: [f64; 3] = g
                .amplitudes
                .clone()
                .try_into()
                .map_err(|_| Error::InvalidParameter("--amplitudes needs three values".into()))?;
            make_beltrami_flow(grid, a, g.viscosity)?
        }
        Kind::Random => make_random_divfree_flow(grid, g.seed, g.kmax, g.amplitude)?,
        Kind::Selfsimilar => make_selfsimilar_fixture(grid, g.blowup_time, g.profile_scale)?,
    };
    let params = generator_params(g, kind);
    let meta = params.0.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
    Ok((flow.with_metadata(meta), params))
}

fn load(src: &Source) -> Result<(SampledFlow, Parameters)> {
    match &src.flow {
        Some(path) => {
            let flow = load_flow(path)?;
            let mut p = Parameters::new();
            p.push("flow", path.display()).push("flow_metadata", flow.metadata());
            Ok((flow, p))
        }
        None => generate(&src.gen),
    }
}

fn gen(c: GenCmd) -> Result<ExitCode> {
    let (flow, _) = generate(&c.gen)?;
    save_flow(&flow, &c.out)?;
    Ok(ExitCode::SUCCESS)
}

fn point3(v: &[f64], what: &str) -> Result<[f64; 3]> {
    v.try_into().map_err(|_| Error::InvalidParameter(format!("{what} needs three coordinates")))
}

fn functionals(c: FunctionalsCmd) -> Result<ExitCode> {
    let (flow, mut params) = load(&c.source)?;
    if c.require_pressure && !flow.has_pressure() {
        return Err(Error::PressureRequired);
    }
    let g = *flow.grid();
    let x = match &c.x {
        Some(v) => point3(v, "--x")?,
        None => g.center(),
    };
    let t = c.t.unwrap_or(g.t1);
    let mut fp = FunctionalParams { q: c.q, ..FunctionalParams::default() };
    if c.relaxed {
        fp.resolution = Resolution::RELAXED;
    }
    let ev = Functionals::new(&flow, fp)?;
    let reports = c
        .r
        .iter()
        .map(|&r| {
            let cyl = ev.cylinder(x, t, r)?;
            ev.report(&cyl)
        })
        .collect::<Result<Vec<_>>>()?;
    params
        .push("x", join(&x))
        .push("t", t)
        .push("r", join(&c.r))
        .push("q", c.q)
        .push("resolution", if c.relaxed { "relaxed" } else { "strict" });
    let w = sink(&c.output.out)?;
    match c.output.format {
        Format::Csv => write_functionals_csv(w, &params, &reports)?,
        Format::Json => write_json(w, &params, "rows", &reports)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn read_baseline(path: &Path) -> Result<Vec<ConstantFit>> {
    let text = std::fs::read_to_string(path)?;
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let fits = match &value {
        serde_json::Value::Array(_) => value,
        serde_json::Value::Object(o) => o
            .get("fits")
            .or_else(|| o.get("report").and_then(|r| r.get("fits")))
            .cloned()
            .ok_or_else(|| Error::InvalidParameter(format!("{} has no 'fits' list", path.display())))?,
        _ => return Err(Error::InvalidParameter(format!("{} is not a fit list", path.display()))),
    };
    Ok(serde_json::from_value(fits)?)
}

fn verify(c: VerifyCmd) -> Result<ExitCode> {
    let mut spec = SuiteSpec {
        fields: c.fields,
        seed: c.seed,
        resolutions: c.resolutions.clone(),
        max_wavenumber: c.kmax,
        n_times: c.n_times,
        radius: c.radius,
        keep_checks: c.keep_checks,
        ..SuiteSpec::default()
    };
    if !c.lemma.is_empty() {
        spec.lemmas = c.lemma.iter().map(|s| s.parse()).collect::<Result<Vec<LemmaId>>>()?;
        if spec.lemmas.contains(&LemmaId::EnergyBalance) {
            return Err(Error::InvalidParameter("the energy balance is not a suite lemma".into()));
        }
    }
    let mut params = Parameters::new();
    params
        .push("fields", spec.fields)
        .push("seed", spec.seed)
        .push("resolutions", spec.resolutions.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","))
        .push("kmax", spec.max_wavenumber)
        .push("n_times", spec.n_times)
        .push("radius", spec.radius)
        .push("lemmas", spec.lemmas.iter().map(|l| l.code()).collect::<Vec<_>>().join(","));
    if let (Some(q), Some(k)) = (c.q, c.k) {
        cknscope::functionals::check_k(q, k)?;
        spec.qk = vec![(q, k)];
        params.push("q", q).push("k", k).push("alpha", alpha(q, k)).push("beta", beta(q, k));
    }
    let baseline = c.baseline.as_deref().map(read_baseline).transpose()?;
    let mut report: VerificationReport = fit_constants(&spec, baseline.as_deref())?;
    if let Some(b) = &baseline {
        report.baseline = compare_baseline(&report.fits, b);
    }
    if c.pressure_fields > 0 {
        report.pressure = Some(pressure_constants(&spec, c.pressure_fields, c.pressure_radius)?);
    }
    let w = sink(&c.output.out)?;
    match c.output.format {
        Format::Json => write_json(w, &params, "report", &report)?,
        Format::Csv => {
            if spec.keep_checks {
                write_checks_csv(w, &params, &report.checks)?
            } else {
                write_fits_csv(w, &params, &report.fits)?
            }
        }
    }
    let regressed = report.baseline.iter().any(|b| !b.pass);
    Ok(if regressed { ExitCode::from(3) } else { ExitCode::SUCCESS })
}

fn scan(c: ScanCmd) -> Result<ExitCode> {
    let (flow, mut params) = load(&c.source)?;
    let g = *flow.grid();
    let t = c.t.unwrap_or(g.t1);
    if c.point.len() % 3 != 0 {
        return Err(Error::InvalidParameter("--point takes x1,x2,x3".into()));
    }
    let mut points: Vec<ScanPoint> = c.point.chunks(3).map(|p| ScanPoint { x: [p[0], p[1], p[2]], t }).collect();
    if let Some(cube) = &c.cube {
        let [half, per] = cube[..] else {
            return Err(Error::InvalidParameter("--cube takes half-width,per-axis".into()));
        };
        if !(per >= 1.0 && per.fract() == 0.0) {
            return Err(Error::InvalidParameter("--cube per-axis count must be a positive integer".into()));
        }
        points.extend(cube_points(g.center(), half, per as usize, t));
    }
    if c.point.is_empty() && c.cube.is_none() {
        points.push(ScanPoint { x: g.center(), t });
    }
    let criteria = c.criteria.iter().map(|s| s.parse()).collect::<Result<Vec<CriterionId>>>()?;
    let spec = CriterionSpec { criteria, epsilon: c.epsilon, q: c.q, m_cap: c.m_cap, tail_length: c.tail };
    let ladder = LadderSpec { r_max: c.r_max, rho: c.rho, levels: c.levels };
    let fp = FunctionalParams { q: if c.q < 2.0 { c.q } else { 2.0 }, resolution: Resolution::SWEEP, ..FunctionalParams::default() };
    let ev = Functionals::new(&flow, fp)?;
    let rows = scan_grid(&ev, &points, &ladder, &spec);
    params
        .push("t", t)
        .push("r_max", c.r_max)
        .push("rho", c.rho)
        .push("levels", c.levels.map_or("auto".to_string(), |l| l.to_string()))
        .push("criteria", spec.criteria.iter().map(|c| c.name()).collect::<Vec<_>>().join(","))
        .push("epsilon", c.epsilon)
        .push("q", c.q)
        .push("M_cap", c.m_cap)
        .push("tail", c.tail.map_or("auto".to_string(), |l| l.to_string()))
        .push("points", points.len());
    let w = sink(&c.output.out)?;
    match c.output.format {
        Format::Csv => write_scan_csv(w, &params, &rows)?,
        Format::Json => write_json(w, &params, "rows", &rows)?,
    }
    let failed = rows.iter().filter(|r| r.is_error()).count();
    if failed > 0 {
        eprintln!("warning: {failed} verdict(s) could not be computed; see the error column");
        if c.strict {
            return Ok(ExitCode::from(3));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn emit<S: serde::Serialize>(out: &Output, params: &Parameters, key: &str, value: &S, csv: impl FnOnce(Box<dyn Write>) -> Result<()>) -> Result<()> {
    let w = sink(&out.out)?;
    match out.format {
        Format::Csv => csv(w),
        Format::Json => write_json(w, params, key, value),
    }
}

fn single_m(c: &TraceCmd) -> Result<f64> {
    match c.m_bar[..] {
        [m] => Ok(m),
        _ => Err(Error::InvalidParameter("this trace takes a single --M".into())),
    }
}

fn trace(c: TraceCmd) -> Result<ExitCode> {
    let mut params = Parameters::new();
    if c.iteration {
        let m = single_m(&c)?;
        let tr = iterate_y(c.beta, c.q, m, c.y0, c.steps)?;
        params.push("mode", "iteration").push("beta", c.beta).push("q", c.q).push("M", m).push("Y0", c.y0).push("steps", c.steps);
        emit(&c.output, &params, "trace", &tr, |w| write_iteration_csv(w, &params, &tr))?;
    } else if c.theorem1 {
        let m = single_m(&c)?;
        let tr = theorem1_trace(m, c.m_under, c.q, c.beta)?;
        params.push("mode", "theorem1").push("M", m).push("m", c.m_under).push("q", c.q).push("beta", c.beta);
        emit(&c.output, &params, "trace", &tr, |w| write_theorem1_csv(w, &params, &tr))?;
    } else if c.theorem2 {
        let m = single_m(&c)?;
        let tr = theorem2_trace(m, c.m_under, c.eps, c.beta)?;
        params.push("mode", "theorem2").push("M", m).push("m", c.m_under).push("epsilon", c.eps).push("beta", c.beta);
        emit(&c.output, &params, "trace", &tr, |w| write_theorem2_csv(w, &params, &tr))?;
    } else {
        let curve = epsilon_curve(c.eps, &c.m_bar)?;
        params.push("mode", "epsilon-curve").push("epsilon", c.eps);
        let rows: Vec<serde_json::Value> =
            curve.iter().map(|&(m, e)| serde_json::json!({"M": m, "epsilon_over_M": e})).collect();
        emit(&c.output, &params, "curve", &rows, |w| write_epsilon_curve_csv(w, &params, &curve))?;
    }
    Ok(ExitCode::SUCCESS)
}
