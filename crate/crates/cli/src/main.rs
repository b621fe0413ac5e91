use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use tilenet::discrepancy::{
    bk_scan, layer_decay_rate, layer_decomposition, laczkovich_scan, polyomino_windows,
    random_polyomino, tile_series, BkReport, LaczkovichReport, LayerDecomposition, MasterPatch,
    SquareSampler, TileSeries,
};
use tilenet::geometry::{CubeUnion, Vec2};
use tilenet::io::{
    match_to_csv, net_to_csv, parse_rule_file, patch_to_csv, render_svg, rows_to_csv, to_toml,
    Scene, SvgStyle,
};
use tilenet::matching::{displacement_profile, match_level, DisplacementProfile};
use tilenet::net::extract_net;
use tilenet::spectral::{analyze_rule, check_xi_consistency, decay_probe, DecayProbe, SpectralReport, XiConsistency};
use tilenet::subst::{builtin, supertile, validate_rule, Hierarchy, SubstitutionRule, ValidationReport};
use tilenet::{Error, Result};

#[derive(Parser)]
#[command(name = "tilenet", version, about = "Substitution tilings, their nets, and lattice-equivalence diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a rule: polygons, child containment, areas, overlaps.
    Validate(RuleArg),
    /// Write the level-m supertile (and optionally its net) as CSV.
    Generate(GenerateArgs),
    /// Substitution matrix, Perron data and decay probes.
    Analyze(AnalyzeArgs),
    #[command(subcommand)]
    Discrepancy(DiscrepancyCommand),
    /// Bottleneck displacement profile against a scaled lattice.
    Match(MatchArgs),
    /// Render a supertile, its net or a matching as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct RuleArg {
    /// Built-in rule name (penrose, chair) or path to a rule file.
    #[arg(long, default_value = "penrose")]
    rule: String,
}

#[derive(Args)]
struct ReportOut {
    /// Write the TOML report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-row numbers as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    rule: RuleArg,
    /// 1-based root tile type.
    #[arg(long, default_value_t = 1)]
    root: usize,
    #[arg(long)]
    level: u32,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Patch CSV.
    #[arg(long)]
    out: PathBuf,
    /// Net CSV.
    #[arg(long)]
    net: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    rule: RuleArg,
    /// Probe slack; defaults to (λ1 - |λ2|) / 10.
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, default_value_t = 20)]
    mmax: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum DiscrepancyCommand {
    /// Sampled E_α(2^j) on dyadic squares.
    Bk(BkArgs),
    /// Ratio on random polyomino windows.
    Laczkovich(LaczkovichArgs),
    /// Greedy layer partition of polyomino windows.
    Layers(LayersArgs),
    /// Supertile discrepancy from the matrix.
    Tiles(TilesArgs),
}

#[derive(Args)]
struct BkArgs {
    #[command(flatten)]
    rule: RuleArg,
    #[arg(long, default_value_t = 1)]
    root: usize,
    #[arg(long, default_value_t = 9)]
    level: u32,
    #[arg(long, default_value_t = 4)]
    jmin: u32,
    #[arg(long, default_value_t = 8)]
    jmax: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Squares sampled per scale.
    #[arg(long, default_value_t = tilenet::discrepancy::DEFAULT_MAX_SQUARES)]
    samples: usize,
    /// Headroom of the largest square over 2^jmax when scaling the patch.
    #[arg(long, default_value_t = 1.1)]
    fit: f64,
    #[command(flatten)]
    out: ReportOut,
}

#[derive(Args)]
struct LaczkovichArgs {
    #[command(flatten)]
    rule: RuleArg,
    #[arg(long, default_value_t = 1)]
    root: usize,
    #[arg(long, default_value_t = 9)]
    level: u32,
    #[arg(long, default_value_t = 200)]
    windows: usize,
    #[arg(long, default_value_t = 10)]
    min_cells: usize,
    #[arg(long, default_value_t = 10_000)]
    max_cells: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: ReportOut,
}

#[derive(Args)]
struct LayersArgs {
    #[command(flatten)]
    rule: RuleArg,
    #[arg(long, default_value_t = 1)]
    root: usize,
    #[arg(long, default_value_t = 9)]
    level: u32,
    /// Cells per window.
    #[arg(long, default_value_t = 4096)]
    cells: usize,
    #[arg(long, default_value_t = 8)]
    windows: usize,
    /// Lowest layer level.
    #[arg(long, default_value_t = 0)]
    n: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: ReportOut,
}

#[derive(Args)]
struct TilesArgs {
    #[command(flatten)]
    rule: RuleArg,
    /// 1-based tile type; all types when absent.
    #[arg(long = "type")]
    tile: Option<usize>,
    #[arg(long, default_value_t = 12)]
    mmax: u32,
    #[command(flatten)]
    out: ReportOut,
}

#[derive(Args)]
struct MatchArgs {
    #[command(flatten)]
    rule: RuleArg,
    #[arg(long, default_value_t = 1)]
    root: usize,
    /// Level range `a..b` (inclusive) or a comma list.
    #[arg(long, default_value = "4..8")]
    levels: String,
    /// Lattice spacing; defaults to α^(-1/2).
    #[arg(long)]
    beta: Option<f64>,
    /// Multiplies the spacing.
    #[arg(long, default_value_t = 1.0)]
    beta_factor: f64,
    /// Lattice offset from the window corner, `x,y`.
    #[arg(long, default_value = "0,0")]
    phase: String,
    /// Matched pairs of the highest level as CSV.
    #[arg(long)]
    pairs_csv: Option<PathBuf>,
    #[command(flatten)]
    out: ReportOut,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    rule: RuleArg,
    #[arg(long, default_value_t = 1)]
    root: usize,
    #[arg(long)]
    level: u32,
    /// Draw the net points.
    #[arg(long)]
    net: bool,
    /// Draw the matching to the α^(-1/2) lattice instead of the tiles.
    #[arg(long = "match")]
    matching: bool,
    #[arg(long)]
    out: PathBuf,
}

fn load_rule(source: &str) -> Result<Arc<SubstitutionRule>> {
    if let Some(r) = builtin(source) {
        return Ok(r);
    }
    if Path::new(source).exists() {
        return parse_rule_file(source).map(Arc::new);
    }
    Err(Error::InvalidArgument(format!(
        "`{source}` is neither a built-in rule nor a readable file"
    )))
}

fn root_index(rule: &SubstitutionRule, root: usize) -> Result<usize> {
    if root == 0 || root > rule.n() {
        return Err(Error::InvalidArgument(format!(
            "root type must lie in 1..={}, got {root}",
            rule.n()
        )));
    }
    Ok(root - 1)
}

/// Fails early when the parent directory of an output path is missing.
fn check_outputs<'a>(paths: impl IntoIterator<Item = Option<&'a PathBuf>>) -> Result<()> {
    for p in paths.into_iter().flatten() {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty());
        if let Some(d) = parent {
            if !d.is_dir() {
                return Err(Error::Io(format!("directory {} does not exist", d.display())));
            }
        }
        if p.is_dir() {
            return Err(Error::Io(format!("{} is a directory", p.display())));
        }
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(report: &T, out: Option<&PathBuf>) -> Result<()> {
    let text = to_toml(report)?;
    match out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_levels(s: &str) -> Result<Vec<u32>> {
    let bad = || Error::InvalidArgument(format!("bad level list `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad()))
        .collect()
}

fn parse_vec2(s: &str) -> Result<Vec2> {
    let bad = || Error::InvalidArgument(format!("expected `x,y`, got `{s}`"));
    let (x, y) = s.split_once(',').ok_or_else(bad)?;
    Ok(Vec2::new(
        x.trim().parse().map_err(|_| bad())?,
        y.trim().parse().map_err(|_| bad())?,
    ))
}

#[derive(Serialize)]
struct RuleSummary {
    name: String,
    n: usize,
    q: u32,
    xi: f64,
    areas: Vec<f64>,
}

impl RuleSummary {
    fn of(rule: &SubstitutionRule) -> Self {
        RuleSummary {
            name: rule.name().to_string(),
            n: rule.n(),
            q: rule.q(),
            xi: rule.xi(),
            areas: rule.areas(),
        }
    }
}

#[derive(Serialize)]
struct ValidateReport {
    rule: RuleSummary,
    validation: ValidationReport,
}

fn validate(a: &RuleArg) -> Result<()> {
    let rule = load_rule(&a.rule)?;
    let validation = validate_rule(&rule)?;
    let ok = validation.ok;
    emit(&ValidateReport { rule: RuleSummary::of(&rule), validation }, None)?;
    if ok {
        Ok(())
    } else {
        Err(Error::Validation("rule failed geometric checks".into()))
    }
}

#[derive(Serialize)]
struct GenerateReport {
    rule: String,
    root_type: usize,
    level: u32,
    scale: f64,
    tiles: usize,
    /// Tile counts per type.
    counts: Vec<u64>,
    area: f64,
}

fn generate(a: &GenerateArgs) -> Result<()> {
    check_outputs([Some(&a.out), a.net.as_ref()])?;
    let rule = load_rule(&a.rule.rule)?;
    let root = root_index(&rule, a.root)?;
    let patch = supertile(&rule, root, a.level)?.scaled(a.scale);
    write(&a.out, &patch_to_csv(&patch)?)?;
    if let Some(p) = &a.net {
        let net = extract_net(&patch)?.with_provenance(tilenet::net::Provenance {
            rule: rule.name().to_string(),
            root_type: a.root,
            root_level: a.level,
        });
        write(p, &net_to_csv(&net)?)?;
    }
    emit(
        &GenerateReport {
            rule: rule.name().to_string(),
            root_type: a.root,
            level: a.level,
            scale: a.scale,
            tiles: patch.len(),
            counts: patch.count_types(),
            area: patch.total_area(),
        },
        None,
    )
}

#[derive(Serialize)]
struct AnalyzeReport {
    rule: RuleSummary,
    spectrum: SpectralReport,
    xi_consistency: XiConsistency,
    decay: DecayProbe,
}

fn analyze(a: &AnalyzeArgs) -> Result<()> {
    check_outputs([a.out.as_ref()])?;
    let rule = load_rule(&a.rule.rule)?;
    let (m, mut spectrum) = analyze_rule(&rule)?;
    if let Some(e) = a.epsilon {
        spectrum = spectrum.with_epsilon(e)?;
    }
    let mut u = vec![0.0; rule.n()];
    u[0] = 1.0;
    let decay = decay_probe(&m, &u, a.mmax, &spectrum)?;
    let report = AnalyzeReport {
        rule: RuleSummary::of(&rule),
        xi_consistency: check_xi_consistency(&rule, &spectrum),
        spectrum,
        decay,
    };
    emit(&report, a.out.as_ref())
}

#[derive(Serialize)]
struct BkOutput {
    rule: String,
    root_type: usize,
    level: u32,
    seed: u64,
    report: BkReport,
}

fn bk(a: &BkArgs) -> Result<()> {
    check_outputs([a.out.out.as_ref(), a.out.csv.as_ref()])?;
    if a.jmin > a.jmax || a.jmax > 40 {
        return Err(Error::InvalidArgument(format!("bad scale range {}..{}", a.jmin, a.jmax)));
    }
    let rule = load_rule(&a.rule.rule)?;
    let root = root_index(&rule, a.root)?;
    let (_, spectrum) = analyze_rule(&rule)?;
    let scale = MasterPatch::bk_scale(&rule, root, a.level, a.jmax, a.fit)?;
    let master = MasterPatch::new(&rule, root, a.level, scale, spectrum.alpha)?;
    let sampler = SquareSampler {
        max_squares: a.samples,
        ..SquareSampler::new(a.seed)
    };
    let mut report = bk_scan(&master.net, master.alpha, &master.safe, a.jmin..=a.jmax, &sampler)?;
    report.scale = scale;
    if let Some(p) = &a.out.csv {
        write(p, &rows_to_csv(&report.per_scale)?)?;
    }
    emit(
        &BkOutput {
            rule: rule.name().to_string(),
            root_type: a.root,
            level: a.level,
            seed: a.seed,
            report,
        },
        a.out.out.as_ref(),
    )
}

#[derive(Serialize)]
struct LaczkovichOutput {
    rule: String,
    root_type: usize,
    level: u32,
    seed: u64,
    report: LaczkovichReport,
}

fn laczkovich(a: &LaczkovichArgs) -> Result<()> {
    check_outputs([a.out.out.as_ref(), a.out.csv.as_ref()])?;
    if a.min_cells == 0 || a.min_cells > a.max_cells {
        return Err(Error::InvalidArgument("need 0 < min-cells <= max-cells".into()));
    }
    let rule = load_rule(&a.rule.rule)?;
    let root = root_index(&rule, a.root)?;
    let (_, spectrum) = analyze_rule(&rule)?;
    let scale = MasterPatch::unit_inradius_scale(&rule);
    let master = MasterPatch::new(&rule, root, a.level, scale, spectrum.alpha)?;
    let center = master
        .safe
        .largest_square()
        .ok_or(Error::OutsideSafeRegion)?
        .center();
    let windows =
        polyomino_windows(a.windows, a.min_cells, a.max_cells, &master.safe, center, a.seed)?;
    let mut report = laczkovich_scan(&windows, &master.net, master.alpha, Some(&master.safe))?;
    report.scale = scale;
    if let Some(p) = &a.out.csv {
        write(p, &rows_to_csv(&report.windows)?)?;
    }
    emit(
        &LaczkovichOutput {
            rule: rule.name().to_string(),
            root_type: a.root,
            level: a.level,
            seed: a.seed,
            report,
        },
        a.out.out.as_ref(),
    )
}

#[derive(Serialize)]
struct LayerRow {
    window: usize,
    level: u32,
    tiles: usize,
    count: u64,
    area: f64,
    discrepancy: f64,
    abs_tile_sum: f64,
}

#[derive(Serialize)]
struct WindowSummary {
    cells: usize,
    top_level: Option<u32>,
    boundary_area: f64,
    partition_error: f64,
}

#[derive(Serialize)]
struct LayersOutput {
    rule: String,
    root_type: usize,
    level: u32,
    seed: u64,
    scale: f64,
    alpha: f64,
    /// Bound the fitted rate is compared against, `|λ2| + ε`.
    rate_bound: f64,
    rate: Option<f64>,
    max_partition_error: f64,
    windows: Vec<WindowSummary>,
}

/// Eden polyominoes centred in the safe square, as many as fit.
fn layer_windows(master: &MasterPatch, cells: usize, count: usize, seed: u64) -> Result<Vec<CubeUnion>> {
    let w = master.safe.largest_square().ok_or(Error::OutsideSafeRegion)?;
    let c = w.center();
    (0..count)
        .map(|k| {
            let shape = random_polyomino(cells, tilenet::seeding::sub_seed(seed, &[k as u64]));
            let b = shape.bounds().ok_or(Error::OutsideSafeRegion)?;
            let mid = (b.min + b.max) * 0.5;
            let u = shape.translate((c.x - mid.x).round() as i64, (c.y - mid.y).round() as i64);
            if master.safe.contains_cells(&u) {
                Ok(u)
            } else {
                Err(Error::OutsideSafeRegion)
            }
        })
        .collect()
}

fn layers(a: &LayersArgs) -> Result<()> {
    check_outputs([a.out.out.as_ref(), a.out.csv.as_ref()])?;
    let rule = load_rule(&a.rule.rule)?;
    let root = root_index(&rule, a.root)?;
    let (_, spectrum) = analyze_rule(&rule)?;
    let scale = MasterPatch::unit_inradius_scale(&rule);
    let master = MasterPatch::new(&rule, root, a.level, scale, spectrum.alpha)?;
    let windows = layer_windows(&master, a.cells, a.windows, a.seed)?;
    let decomps: Vec<LayerDecomposition> = windows
        .iter()
        .map(|u| layer_decomposition(u, &master.hierarchy, a.n, master.alpha))
        .collect();
    if let Some(p) = &a.out.csv {
        let rows: Vec<LayerRow> = decomps
            .iter()
            .enumerate()
            .flat_map(|(k, d)| {
                d.layers.iter().map(move |l| LayerRow {
                    window: k,
                    level: l.level,
                    tiles: l.tiles.len(),
                    count: l.count,
                    area: l.area,
                    discrepancy: l.discrepancy,
                    abs_tile_sum: l.abs_tile_sum,
                })
            })
            .collect();
        write(p, &rows_to_csv(&rows)?)?;
    }
    let report = LayersOutput {
        rule: rule.name().to_string(),
        root_type: a.root,
        level: a.level,
        seed: a.seed,
        scale,
        alpha: master.alpha,
        rate_bound: spectrum.lambda2abs + spectrum.epsilon,
        rate: layer_decay_rate(&decomps),
        max_partition_error: decomps.iter().map(|d| d.partition_error).fold(0.0, f64::max),
        windows: windows
            .iter()
            .zip(&decomps)
            .map(|(u, d)| WindowSummary {
                cells: u.len(),
                top_level: d.top_level,
                boundary_area: d.boundary_area,
                partition_error: d.partition_error,
            })
            .collect(),
    };
    emit(&report, a.out.out.as_ref())
}

#[derive(Serialize)]
struct TilesOutput {
    rule: String,
    alpha: f64,
    lambda2abs: f64,
    series: Vec<TileSeries>,
}

#[derive(Serialize)]
struct TileRow {
    tile: usize,
    m: u32,
    value: f64,
}

fn tiles(a: &TilesArgs) -> Result<()> {
    check_outputs([a.out.out.as_ref(), a.out.csv.as_ref()])?;
    let rule = load_rule(&a.rule.rule)?;
    let (m, spectrum) = analyze_rule(&rule)?;
    let types: Vec<usize> = match a.tile {
        Some(t) => vec![root_index(&rule, t)?],
        None => (0..rule.n()).collect(),
    };
    let ms: Vec<u32> = (1..=a.mmax).collect();
    let series: Vec<TileSeries> = types
        .iter()
        .map(|&i| tile_series(&m, rule.xi(), &rule.areas(), i, &ms, spectrum.alpha))
        .collect();
    if let Some(p) = &a.out.csv {
        let rows: Vec<TileRow> = series
            .iter()
            .flat_map(|s| {
                s.m.iter()
                    .zip(&s.values)
                    .map(move |(&m, &value)| TileRow { tile: s.tile, m, value })
            })
            .collect();
        write(p, &rows_to_csv(&rows)?)?;
    }
    emit(
        &TilesOutput {
            rule: rule.name().to_string(),
            alpha: spectrum.alpha,
            lambda2abs: spectrum.lambda2abs,
            series,
        },
        a.out.out.as_ref(),
    )
}

fn matching(a: &MatchArgs) -> Result<()> {
    check_outputs([a.out.out.as_ref(), a.out.csv.as_ref(), a.pairs_csv.as_ref()])?;
    let rule = load_rule(&a.rule.rule)?;
    let root = root_index(&rule, a.root)?;
    let levels = parse_levels(&a.levels)?;
    let phase = parse_vec2(&a.phase)?;
    let beta = match a.beta {
        Some(b) => b,
        None => analyze_rule(&rule)?.1.alpha.powf(-0.5),
    } * a.beta_factor;
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument(format!("lattice spacing must be positive, got {beta}")));
    }
    let profile: DisplacementProfile = displacement_profile(&rule, root, &levels, beta, phase, None)?;
    if let Some(p) = &a.out.csv {
        write(p, &rows_to_csv(&profile.rows)?)?;
    }
    if let Some(p) = &a.pairs_csv {
        let top = *levels.iter().max().expect("nonempty level list");
        let (r, _) = match_level(&rule, root, top, beta, phase, None)?;
        write(p, &match_to_csv(&r)?)?;
    }
    emit(&profile, a.out.out.as_ref())
}

fn render(a: &RenderArgs) -> Result<()> {
    check_outputs([Some(&a.out)])?;
    let rule = load_rule(&a.rule.rule)?;
    let root = root_index(&rule, a.root)?;
    let mut scene = Scene::default();
    if a.matching {
        let beta = analyze_rule(&rule)?.1.alpha.powf(-0.5);
        let (r, _) = match_level(&rule, root, a.level, beta, Vec2::ZERO, None)?;
        scene = scene.with_match(&r);
        scene.points = r.pairs.iter().map(|p| p.0).collect();
    } else {
        let h = Hierarchy::build(&rule, root, a.level)?;
        let patch = h.patch(0);
        scene = scene.with_patch(&patch);
        if a.net {
            scene = scene.with_net(&extract_net(&patch)?);
        }
    }
    write(&a.out, &render_svg(&scene, &SvgStyle::default()))
}

fn exit_code(e: &Error) -> u8 {
    match e.category() {
        "usage" => 2,
        "parse" => 3,
        "validation" => 4,
        "capacity" => 5,
        "spectral" => 6,
        "net" => 7,
        "discrepancy" => 8,
        "matching" => 9,
        _ => 10,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(a) => validate(a),
        Command::Generate(a) => generate(a),
        Command::Analyze(a) => analyze(a),
        Command::Discrepancy(d) => match d {
            DiscrepancyCommand::Bk(a) => bk(a),
            DiscrepancyCommand::Laczkovich(a) => laczkovich(a),
            DiscrepancyCommand::Layers(a) => layers(a),
            DiscrepancyCommand::Tiles(a) => tiles(a),
        },
        Command::Match(a) => matching(a),
        Command::Render(a) => render(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(exit_code(&e))
        }
    }
}
