use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use gridcut_core::benchmark::{fidelity_benchmark, BenchmarkConfig, FidelityTrace};
use gridcut_core::embed::{select_register, EmbedParams};
use gridcut_core::graph::{bitstring, brute_force_maxcut, GraphJson, OracleResult, WeightedGraph};
use gridcut_core::gridparse::{case_to_graph, parse_matpower, BusIndexJson};
use gridcut_core::optim::OptimizerConfig;
use gridcut_core::pulseopt::{adiabatic_schedule, run_adiabatic_pipeline, AdiabaticParams, PipelineConfig, DEFAULT_KNOTS};
use gridcut_core::qaoa::{
    lattice_graph, optimize_qaoa, rescale_to_min_distance, vanilla_qaoa, AmplitudeReading, QaoaHardwareConfig, QaoaReport,
};
use gridcut_core::rydsim::{Layout, LayoutJson, MeasurementNoise, PulseSchedule, RegisterBounds, ScheduleJson, SimConfig};
use gridcut_core::units::{mhz_to_rad_per_us, rad_per_us_to_mhz};
use serde::Serialize;

use crate::config::{AdiabaticConfig, BenchConfig, EmbedConfig, OracleConfig, ParseConfig, QaoaConfig};
use crate::output::{sidecar_path, to_json_bytes, Outcome, SCHEMA_VERSION};
use crate::CliError;

type Ran = Result<(Outcome, Vec<PathBuf>), CliError>;

#[derive(Serialize)]
struct Versioned<T> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

fn versioned<T: Serialize>(body: T) -> Vec<u8> {
    to_json_bytes(&Versioned {
        schema_version: SCHEMA_VERSION,
        body,
    })
}

fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    serde_json::from_str(&read_text(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn load_graph(graph: &Option<PathBuf>, case: &Option<PathBuf>) -> Result<(WeightedGraph, PathBuf), CliError> {
    match (graph, case) {
        (Some(g), None) => {
            let json: GraphJson = read_json(g)?;
            Ok((WeightedGraph::from_json(&json)?, g.clone()))
        }
        (None, Some(c)) => Ok((case_to_graph(&parse_matpower(&read_text(c)?)?)?, c.clone())),
        (Some(_), Some(_)) => Err(CliError::Usage("give either --graph or --case, not both".into())),
        (None, None) => Err(CliError::Usage("a graph is required (--graph or --case)".into())),
    }
}

fn load_layout(path: &Option<PathBuf>) -> Result<(Layout, PathBuf), CliError> {
    let path = path.as_ref().ok_or_else(|| CliError::Usage("--layout is required".into()))?;
    let json: LayoutJson = read_json(path)?;
    Ok((Layout::from_json(&json)?, path.clone()))
}

fn seeds(pairs: &[(&str, u64)]) -> BTreeMap<String, u64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn noise(p01: f64, p10: f64) -> Result<Option<MeasurementNoise>, CliError> {
    let m = MeasurementNoise::new(p01, p10)?;
    Ok((!m.is_trivial()).then_some(m))
}

pub fn parse(cfg: &ParseConfig) -> Ran {
    let path = cfg.case.as_ref().ok_or_else(|| CliError::Usage("--case is required".into()))?;
    let case = parse_matpower(&read_text(path)?)?;
    let graph = case_to_graph(&case)?;
    let outcome = Outcome {
        main: versioned(graph.to_json()),
        sidecars: vec![("bus_index.json".into(), to_json_bytes(&BusIndexJson::from_case(&case)))],
        seeds: BTreeMap::new(),
    };
    Ok((outcome, vec![path.clone()]))
}

#[derive(Serialize)]
struct OracleReport<'a> {
    n: usize,
    n_edges: usize,
    total_weight: f64,
    #[serde(flatten)]
    oracle: &'a OracleResult,
}

pub fn oracle(cfg: &OracleConfig) -> Ran {
    let (graph, input) = load_graph(&cfg.graph, &cfg.case)?;
    let oracle = brute_force_maxcut(&graph)?;
    let report = OracleReport {
        n: graph.n_vertices(),
        n_edges: graph.n_edges(),
        total_weight: graph.total_weight(),
        oracle: &oracle,
    };
    Ok((
        Outcome {
            main: versioned(report),
            sidecars: vec![],
            seeds: BTreeMap::new(),
        },
        vec![input],
    ))
}

fn embed_params(area: f64, iterations: usize, temperature: f64, rho: f64, cfg_variant: gridcut_core::embed::ForceVariant, weighted: bool, seed: u64) -> EmbedParams {
    EmbedParams {
        area_per_vertex: area,
        iterations,
        initial_temperature: temperature,
        rho,
        variant: cfg_variant,
        weighted_attraction: weighted,
        seed,
        ..EmbedParams::default()
    }
}

#[derive(Serialize)]
struct EmbedReport {
    n: usize,
    registers: usize,
    best_index: usize,
    costs: Vec<f64>,
    layout: LayoutJson,
}

pub fn embed(cfg: &EmbedConfig) -> Ran {
    let (graph, input) = load_graph(&cfg.graph, &cfg.case)?;
    let sim = SimConfig::default().with_dt(cfg.dt);
    let pulse = adiabatic_schedule(&AdiabaticParams::defaults(&sim.constants), cfg.t_max, DEFAULT_KNOTS, &sim.constants)?;
    let params = embed_params(cfg.area_per_vertex, cfg.iterations, cfg.temperature, cfg.rho, cfg.variant, cfg.weighted, cfg.seed);
    let sel = select_register(&graph, cfg.registers, &pulse, &sim, &params)?;
    let report = EmbedReport {
        n: graph.n_vertices(),
        registers: cfg.registers,
        best_index: sel.best_index,
        costs: sel.costs,
        layout: sel.best.to_json(),
    };
    Ok((
        Outcome {
            main: versioned(report),
            sidecars: vec![("layout.json".into(), to_json_bytes(&sel.best.to_json()))],
            seeds: seeds(&[("layout_base", cfg.seed)]),
        },
        vec![input],
    ))
}

#[derive(Serialize)]
struct ParamsMhz {
    p0_mhz: f64,
    p1: f64,
    p2_mhz: f64,
}

impl From<AdiabaticParams> for ParamsMhz {
    fn from(p: AdiabaticParams) -> Self {
        Self {
            p0_mhz: rad_per_us_to_mhz(p.p0),
            p1: p.p1,
            p2_mhz: rad_per_us_to_mhz(p.p2),
        }
    }
}

#[derive(Serialize)]
struct AdiabaticReport {
    n: usize,
    oracle: OracleResult,
    best_layout_index: usize,
    layout_costs: Vec<f64>,
    layout: LayoutJson,
    initial_params: ParamsMhz,
    params: ParamsMhz,
    cost_trace: Vec<f64>,
    converged: bool,
    final_cost: f64,
    p_gs: f64,
    p_gs_shots: Option<f64>,
    step_to_solution: Option<f64>,
    schedule: ScheduleJson,
    histogram_csv: String,
}

pub fn adiabatic(cfg: &AdiabaticConfig, out: &Path) -> Ran {
    let (graph, input) = load_graph(&cfg.graph, &cfg.case)?;
    let sim = SimConfig::default().with_dt(cfg.dt);
    let defaults = AdiabaticParams::defaults(&sim.constants);
    let initial = AdiabaticParams {
        p0: cfg.p0_mhz.map_or(defaults.p0, mhz_to_rad_per_us),
        p1: cfg.p1.unwrap_or(defaults.p1),
        p2: cfg.p2_mhz.map_or(defaults.p2, mhz_to_rad_per_us),
    };
    let pipeline = PipelineConfig {
        registers: cfg.registers,
        embed: embed_params(cfg.area_per_vertex, cfg.iterations, cfg.temperature, cfg.rho, cfg.variant, cfg.weighted, cfg.seed),
        initial: Some(initial),
        t_max: cfg.t_max,
        knots: cfg.knots,
        optimizer: OptimizerConfig {
            algorithm: cfg.algorithm,
            learning_rate: cfg.learning_rate,
            max_steps: cfg.steps,
            ..PipelineConfig::default().optimizer
        },
        sim,
        final_dt: cfg.final_dt,
        shots: cfg.shots,
        noise: noise(cfg.p01, cfg.p10)?,
        seed: cfg.seed,
    };
    let r = run_adiabatic_pipeline(&graph, &pipeline)?;

    let n = graph.n_vertices();
    let mut csv = String::from("bitstring,probability,count\n");
    for (k, p) in r.distribution.as_slice().iter().enumerate() {
        let count = r.histogram.as_ref().map(|h| h.count(k as u64).to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{}", bitstring(k as u64, n), p, count);
    }
    let report = AdiabaticReport {
        n,
        oracle: r.oracle.clone(),
        best_layout_index: r.best_layout_index,
        layout_costs: r.layout_costs.clone(),
        layout: r.layout.to_json(),
        initial_params: r.initial_params.into(),
        params: r.params.into(),
        cost_trace: r.cost_trace.clone(),
        converged: r.converged,
        final_cost: r.final_cost,
        p_gs: r.p_gs,
        p_gs_shots: r.p_gs_shots,
        step_to_solution: r.step_to_solution,
        schedule: r.schedule.to_json(),
        histogram_csv: sidecar_path(out, "histogram.csv").file_name().unwrap().to_string_lossy().into_owned(),
    };
    Ok((
        Outcome {
            main: versioned(report),
            sidecars: vec![
                ("histogram.csv".into(), csv.into_bytes()),
                ("layout.json".into(), to_json_bytes(&r.layout.to_json())),
                ("schedule.json".into(), to_json_bytes(&r.schedule.to_json())),
            ],
            seeds: seeds(&[("layout_base", cfg.seed), ("shots", cfg.seed)]),
        },
        vec![input],
    ))
}

#[derive(Serialize)]
struct QaoaOut<'a> {
    n: usize,
    vanilla: bool,
    best_p_gs: f64,
    #[serde(flatten)]
    report: &'a QaoaReport,
}

pub fn qaoa(cfg: &QaoaConfig) -> Ran {
    let sim = SimConfig::default();
    let mut inputs = Vec::new();
    let mut sidecars = Vec::new();
    let (graph, layout) = if let Some(lattice) = cfg.lattice {
        if cfg.graph.is_some() || cfg.case.is_some() || cfg.layout.is_some() {
            return Err(CliError::Usage("--lattice generates its own graph and layout".into()));
        }
        let n = cfg.vertices.ok_or_else(|| CliError::Usage("--lattice needs --vertices".into()))?;
        let inst = lattice_graph(n, lattice, cfg.lattice_spacing, cfg.lattice_seed, &RegisterBounds::default(), &sim.constants)?;
        sidecars.push(("graph.json".to_string(), to_json_bytes(&inst.graph.to_json())));
        (inst.graph, Some(inst.layout))
    } else {
        let (graph, g_in) = load_graph(&cfg.graph, &cfg.case)?;
        inputs.push(g_in);
        let layout = if cfg.vanilla && cfg.layout.is_none() {
            None
        } else {
            let (layout, l_in) = load_layout(&cfg.layout)?;
            inputs.push(l_in);
            Some(layout)
        };
        (graph, layout)
    };
    let layout = match layout {
        Some(l) if cfg.rescale => Some(rescale_to_min_distance(&l, cfg.lattice_spacing)?),
        other => other,
    };
    if let Some(l) = &layout {
        sidecars.push(("layout.json".to_string(), to_json_bytes(&l.to_json())));
    }
    let opt = OptimizerConfig {
        algorithm: cfg.algorithm,
        learning_rate: cfg.learning_rate,
        max_steps: cfg.steps,
        gradient: cfg.gradient,
        convergence_tol: cfg.tolerance,
        patience: cfg.patience,
        ..gridcut_core::qaoa::default_qaoa_optimizer()
    };
    let report = if cfg.vanilla {
        vanilla_qaoa(&graph, cfg.layers, cfg.seeds, cfg.seed, cfg.layer_cap, &opt)?
    } else {
        let hw = QaoaHardwareConfig {
            omega_prep: mhz_to_rad_per_us(cfg.omega_prep_mhz),
            omega_mixer: mhz_to_rad_per_us(cfg.omega_mixer_mhz),
            phi_prep: cfg.phi_prep,
            phi_mixer: cfg.phi_mixer,
            lattice_spacing: cfg.lattice_spacing,
            layer_cap: cfg.layer_cap,
            amplitude_reading: AmplitudeReading::RadPerUs,
        };
        let layout = layout.as_ref().expect("analog runs always have a layout");
        optimize_qaoa(&graph, layout, cfg.layers, cfg.seeds, cfg.seed, &hw, &sim, &opt)?
    };
    let out = QaoaOut {
        n: graph.n_vertices(),
        vanilla: cfg.vanilla,
        best_p_gs: report.best_p_gs(),
        report: &report,
    };
    Ok((
        Outcome {
            main: versioned(out),
            sidecars,
            seeds: seeds(&[("init_base", cfg.seed), ("lattice", cfg.lattice_seed)]),
        },
        inputs,
    ))
}

#[derive(Serialize)]
struct BenchReport<'a> {
    n: usize,
    cycles: usize,
    t_cycle: f64,
    shots: u64,
    reference_shots: u64,
    #[serde(flatten)]
    trace: &'a FidelityTrace,
}

pub fn bench(cfg: &BenchConfig) -> Ran {
    let (graph, g_in) = load_graph(&cfg.graph, &cfg.case)?;
    let (layout, l_in) = load_layout(&cfg.layout)?;
    let s_in = cfg.schedule.clone().ok_or_else(|| CliError::Usage("--schedule is required".into()))?;
    let schedule = PulseSchedule::from_json(&read_json::<ScheduleJson>(&s_in)?)?;
    let bench_cfg = BenchmarkConfig {
        cycles: cfg.cycles,
        t_cycle: cfg.t_cycle,
        shots: cfg.shots,
        reference_shots: cfg.reference_shots,
        seed: cfg.seed,
        noise: noise(cfg.p01, cfg.p10)?,
        incremental: cfg.incremental,
    };
    let trace = fidelity_benchmark(&graph, &layout, &schedule, &bench_cfg, &SimConfig::default().with_dt(cfg.dt))?;
    let report = BenchReport {
        n: graph.n_vertices(),
        cycles: cfg.cycles,
        t_cycle: cfg.t_cycle,
        shots: cfg.shots,
        reference_shots: cfg.reference_shots,
        trace: &trace,
    };
    Ok((
        Outcome {
            main: trace.to_csv().into_bytes(),
            sidecars: vec![("json".into(), versioned(report))],
            seeds: seeds(&[("shots", cfg.seed)]),
        },
        vec![g_in, l_in, s_in],
    ))
}
