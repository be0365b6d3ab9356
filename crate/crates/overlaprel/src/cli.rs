//! Command-line front end: argument types, manifest handling and the
//! per-subcommand drivers. `main` only parses and dispatches.
//!
//! Exit codes: 0 all artifacts written, 1 parse/usage failure,
//! 2 dimension mismatch, 3 degenerate input.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::composite::{composite_map, diff_masks};
use crate::error::Error;
use crate::formats::{
    load_mask, load_statmap, mask_format_for_path, save_mask, save_statmap_f32raw, MaskFormat,
    MaskWriteFormat, StatMapFormat,
};
use crate::grid::{threshold_statmap, GridDims, StatMap, StudySet, ThresholdSide, VoxelMask};
use crate::outlier::{jackknife_test_matrix, OutlierReport};
use crate::overlap::{overlap_matrix, EmptyPolicy, OverlapKind, OverlapMatrix};
use crate::report::{
    matrix_to_csv, matrix_to_json, matrix_to_svg, merge_markdown, outlier_report_to_csv,
    outlier_report_to_json, summary_to_json,
};
use crate::spectral::{summarize, SummaryResult};
use crate::synth::{generate, PlantMode, SynthConfig};

/// A failed run with its process exit code.
#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

pub type CliResult = Result<(), CliFailure>;

impl From<Error> for CliFailure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::DimMismatch { .. } => 2,
            Error::EmptyPair { .. }
            | Error::DegenerateVariance { .. }
            | Error::TooFewStudies { .. }
            | Error::EmptySubset
            | Error::NonConvergence { .. } => 3,
            _ => 1,
        };
        CliFailure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> CliFailure {
    CliFailure {
        code: 1,
        message: message.into(),
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "overlaprel",
    about = "Reproducibility analysis of binary activation maps",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute Dice and Jaccard overlap matrices
    Overlap(OverlapArgs),
    /// Compute the summarized multi-study overlap coefficient
    Summarize(SummarizeArgs),
    /// Run the jackknife outlier test, optionally sweeping thresholds
    Outliers(OutliersArgs),
    /// Average statistic maps into a composite, threshold and diff
    Composite(CompositeArgs),
    /// Generate a synthetic study family
    Simulate(SimulateArgs),
    /// Merge prior JSON artifacts into one markdown summary
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Mask files (format inferred from extension unless --mask-format is set)
    pub inputs: Vec<PathBuf>,
    /// JSON manifest fixing study order: {"studies":[{"label","path","format"?}]}
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Force one mask format for all positional inputs
    #[arg(long)]
    pub mask_format: Option<MaskFormatArg>,
}

#[derive(Clone, Copy, Debug)]
pub struct MaskFormatArg(pub MaskFormat);

impl std::str::FromStr for MaskFormatArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(MaskFormatArg)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KindArg(pub OverlapKind);

impl std::str::FromStr for KindArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(KindArg)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EmptyPolicyArg(pub EmptyPolicy);

impl std::str::FromStr for EmptyPolicyArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(EmptyPolicyArg)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SideArg(pub ThresholdSide);

impl std::str::FromStr for SideArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse().map(SideArg)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct DimsArg(pub GridDims);

impl std::str::FromStr for DimsArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(['x', ',']).collect();
        if parts.len() != 3 {
            return Err(format!("expected NXxNYxNZ, got {s:?}"));
        }
        let parse = |p: &str| {
            p.parse::<u32>()
                .map_err(|e| format!("bad dimension {p:?}: {e}"))
        };
        GridDims::new(parse(parts[0])?, parse(parts[1])?, parse(parts[2])?)
            .map(DimsArg)
            .map_err(|e| e.to_string())
    }
}

#[derive(Args, Debug)]
pub struct OverlapArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Output directory for artifacts
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Artifact formats, comma separated: json,csv,svg-heatmap
    #[arg(long, default_value = "json,csv", value_delimiter = ',')]
    pub format: Vec<String>,
    #[arg(long, default_value = "error")]
    pub empty_policy: EmptyPolicyArg,
}

#[derive(Args, Debug)]
pub struct SummarizeArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "jaccard")]
    pub kind: KindArg,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value = "error")]
    pub empty_policy: EmptyPolicyArg,
}

#[derive(Args, Debug)]
pub struct OutliersArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "jaccard")]
    pub kind: KindArg,
    /// FDR levels, strictest last is fine; runs are sorted descending
    #[arg(long = "q", default_values_t = [0.05, 0.01])]
    pub q_levels: Vec<f64>,
    #[arg(long, default_value = "error")]
    pub empty_policy: EmptyPolicyArg,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Statistic maps to re-threshold instead of ready-made masks
    #[arg(long = "statmap")]
    pub statmaps: Vec<PathBuf>,
    /// Grid dims for F32RAW statistic maps
    #[arg(long)]
    pub dims: Option<DimsArg>,
    /// Critical values for the robustness sweep (one run per value)
    #[arg(long = "critical")]
    pub criticals: Vec<f64>,
    #[arg(long, default_value = "greater")]
    pub side: SideArg,
}

#[derive(Args, Debug)]
pub struct CompositeArgs {
    /// Statistic maps (F32RAW needs --dims; .nii parsed as NIfTI-1)
    #[arg(long = "statmap", required = true)]
    pub statmaps: Vec<PathBuf>,
    #[arg(long)]
    pub dims: Option<DimsArg>,
    /// Included study indices, comma separated; default all
    #[arg(long, value_delimiter = ',')]
    pub include: Vec<usize>,
    /// Excluded study indices, comma separated
    #[arg(long, value_delimiter = ',')]
    pub exclude: Vec<usize>,
    /// Second include set; when given, the two composites are thresholded
    /// and diffed into .gained/.lost masks
    #[arg(long, value_delimiter = ',')]
    pub compare: Vec<usize>,
    /// Critical value for thresholding the composite into a mask
    #[arg(long)]
    pub critical: Option<f64>,
    #[arg(long, default_value = "greater")]
    pub side: SideArg,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub dims: DimsArg,
    #[arg(long, default_value_t = 12)]
    pub studies: usize,
    #[arg(long, default_value_t = 0.02)]
    pub core_rate: f64,
    #[arg(long, default_value_t = 0.005)]
    pub noise_rate: f64,
    #[arg(long, default_value_t = 0.2)]
    pub dropout: f64,
    /// Planted anomalies as INDEX:MODE with MODE in disjoint|shifted|empty
    #[arg(long = "plant")]
    pub plants: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// JSON artifacts from prior overlap/summarize/outliers runs
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value = "out/report.md")]
    pub out: PathBuf,
}

#[derive(Serialize, Deserialize, Debug)]
struct ManifestStudy {
    label: String,
    path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<MaskFormat>,
}

#[derive(Serialize, Deserialize, Debug)]
struct Manifest {
    studies: Vec<ManifestStudy>,
}

fn read_to_string(path: &Path) -> Result<String, CliFailure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn write_artifact(path: &Path, content: &str) -> CliResult {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| usage(format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, content)
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn resolve_format(path: &Path, forced: Option<MaskFormatArg>) -> Result<MaskFormat, CliFailure> {
    if let Some(f) = forced {
        return Ok(f.0);
    }
    mask_format_for_path(path).ok_or_else(|| {
        usage(format!(
            "cannot infer mask format of {} (use --mask-format)",
            path.display()
        ))
    })
}

fn load_studies(input: &InputArgs) -> Result<StudySet, CliFailure> {
    let mut masks: Vec<VoxelMask> = Vec::new();
    if let Some(manifest_path) = &input.manifest {
        let manifest: Manifest = serde_json::from_str(&read_to_string(manifest_path)?)
            .map_err(|e| usage(format!("bad manifest {}: {e}", manifest_path.display())))?;
        let base = manifest_path.parent().unwrap_or(Path::new("."));
        for entry in manifest.studies {
            let path = if entry.path.is_absolute() {
                entry.path.clone()
            } else {
                base.join(&entry.path)
            };
            let format = match entry.format {
                Some(f) => f,
                None => resolve_format(&path, input.mask_format)?,
            };
            let mut mask = load_mask(&path, format)?;
            mask.set_label(entry.label);
            masks.push(mask);
        }
    }
    for path in &input.inputs {
        let format = resolve_format(path, input.mask_format)?;
        masks.push(load_mask(path, format)?);
    }
    if masks.is_empty() {
        return Err(usage(
            "no input masks given (positional paths or --manifest)",
        ));
    }
    Ok(StudySet::new(masks)?)
}

fn load_statmaps(paths: &[PathBuf], dims: Option<DimsArg>) -> Result<Vec<StatMap>, CliFailure> {
    paths
        .iter()
        .map(|p| {
            let format = match p.extension().and_then(|e| e.to_str()) {
                Some("nii") => StatMapFormat::Nifti1,
                _ => {
                    let d = dims.ok_or_else(|| {
                        usage(format!("--dims required for raw statmap {}", p.display()))
                    })?;
                    StatMapFormat::F32Raw(d.0)
                }
            };
            Ok(load_statmap(p, format)?)
        })
        .collect()
}

fn validated_q_levels(q_levels: &[f64]) -> Result<Vec<f64>, CliFailure> {
    if q_levels.is_empty() {
        return Err(usage("at least one --q level required"));
    }
    let mut qs = q_levels.to_vec();
    for &q in &qs {
        if !(0.0 < q && q < 1.0) {
            return Err(usage(format!("q level {q} outside (0, 1)")));
        }
    }
    qs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    qs.dedup();
    Ok(qs)
}

pub fn cmd_overlap(args: &OverlapArgs) -> CliResult {
    let studies = load_studies(&args.input)?;
    for kind in [OverlapKind::Dice, OverlapKind::Jaccard] {
        let matrix = overlap_matrix(&studies, kind, args.empty_policy.0)?;
        let stem = match kind {
            OverlapKind::Dice => "overlap_dice",
            OverlapKind::Jaccard => "overlap_jaccard",
        };
        for fmt in &args.format {
            match fmt.as_str() {
                "json" => write_artifact(
                    &args.out.join(format!("{stem}.json")),
                    &matrix_to_json(&matrix),
                )?,
                "csv" => write_artifact(
                    &args.out.join(format!("{stem}.csv")),
                    &matrix_to_csv(&matrix),
                )?,
                "svg-heatmap" | "svg" => write_artifact(
                    &args.out.join(format!("{stem}.svg")),
                    &matrix_to_svg(&matrix),
                )?,
                other => return Err(usage(format!("unknown artifact format: {other}"))),
            }
        }
    }
    Ok(())
}

pub fn cmd_summarize(args: &SummarizeArgs) -> CliResult {
    let studies = load_studies(&args.input)?;
    let matrix = overlap_matrix(&studies, args.kind.0, args.empty_policy.0)?;
    let summary = summarize(&matrix)?;
    write_artifact(&args.out.join("summary.json"), &summary_to_json(&summary))
}

/// Flag sets shared by every run of a robustness sweep, per q level.
#[derive(Serialize, Deserialize, Debug)]
pub struct StabilityTable {
    pub criticals: Vec<f64>,
    /// (q, labels flagged at every critical value)
    pub stable_flags: Vec<(f64, Vec<String>)>,
}

fn run_outlier_test(
    studies: &StudySet,
    kind: OverlapKind,
    policy: EmptyPolicy,
    q_levels: &[f64],
) -> Result<OutlierReport, CliFailure> {
    let matrix = overlap_matrix(studies, kind, policy)?;
    Ok(jackknife_test_matrix(&matrix, q_levels)?)
}

pub fn cmd_outliers(args: &OutliersArgs) -> CliResult {
    let qs = validated_q_levels(&args.q_levels)?;
    if args.statmaps.is_empty() {
        let studies = load_studies(&args.input)?;
        let report = run_outlier_test(&studies, args.kind.0, args.empty_policy.0, &qs)?;
        write_artifact(
            &args.out.join("outliers.json"),
            &outlier_report_to_json(&report),
        )?;
        write_artifact(
            &args.out.join("outliers.csv"),
            &outlier_report_to_csv(&report),
        )?;
        return Ok(());
    }

    // robustness sweep: re-threshold the statistic maps per critical value
    if args.criticals.is_empty() {
        return Err(usage(
            "--critical required (at least once) with --statmap inputs",
        ));
    }
    let maps = load_statmaps(&args.statmaps, args.dims)?;
    let mut reports = Vec::new();
    for (run, &critical) in args.criticals.iter().enumerate() {
        let masks: Vec<VoxelMask> = maps
            .iter()
            .map(|m| threshold_statmap(m, critical, args.side.0))
            .collect::<Result<_, _>>()?;
        let studies = StudySet::new(masks)?;
        let report = run_outlier_test(&studies, args.kind.0, args.empty_policy.0, &qs)?;
        let tag = format!("critical_{run}");
        write_artifact(
            &args.out.join(format!("outliers_{tag}.json")),
            &outlier_report_to_json(&report),
        )?;
        write_artifact(
            &args.out.join(format!("outliers_{tag}.csv")),
            &outlier_report_to_csv(&report),
        )?;
        reports.push(report);
    }

    let stable_flags = qs
        .iter()
        .enumerate()
        .map(|(qi, &q)| {
            let mut common: Option<Vec<String>> = None;
            for report in &reports {
                let labels: Vec<String> = report.decisions[qi]
                    .flagged
                    .iter()
                    .map(|f| f.label.clone())
                    .collect();
                common = Some(match common {
                    None => labels,
                    Some(prev) => prev.into_iter().filter(|l| labels.contains(l)).collect(),
                });
            }
            (q, common.unwrap_or_default())
        })
        .collect();
    let table = StabilityTable {
        criticals: args.criticals.clone(),
        stable_flags,
    };
    write_artifact(
        &args.out.join("stability.json"),
        &serde_json::to_string_pretty(&table).expect("stability serialization cannot fail"),
    )
}

pub fn cmd_composite(args: &CompositeArgs) -> CliResult {
    let maps = load_statmaps(&args.statmaps, args.dims)?;
    let include: Vec<usize> = if !args.include.is_empty() {
        args.include.clone()
    } else {
        (0..maps.len())
            .filter(|i| !args.exclude.contains(i))
            .collect()
    };
    for &i in include.iter().chain(&args.compare) {
        if i >= maps.len() {
            return Err(usage(format!(
                "study index {i} out of range (have {})",
                maps.len()
            )));
        }
    }
    let composite = composite_map(&maps, &include)?;
    let out_map = args.out.join("composite.f32");
    if let Some(parent) = out_map.parent() {
        std::fs::create_dir_all(parent)
            .map_err(|e| usage(format!("cannot create {}: {e}", parent.display())))?;
    }
    save_statmap_f32raw(&composite, &out_map)?;
    println!("wrote {}", out_map.display());

    if let Some(critical) = args.critical {
        let mask = threshold_statmap(&composite, critical, args.side.0)?;
        let mask_path = args.out.join("composite.msk");
        save_mask(&mask, &mask_path, MaskWriteFormat::Msk1)?;
        println!("wrote {}", mask_path.display());

        if !args.compare.is_empty() {
            let other = composite_map(&maps, &args.compare)?;
            let other_path = args.out.join("composite_compare.f32");
            save_statmap_f32raw(&other, &other_path)?;
            println!("wrote {}", other_path.display());
            let other_mask = threshold_statmap(&other, critical, args.side.0)?;
            let diff = diff_masks(&mask, &other_mask)?;
            let gained_path = args.out.join("composite.gained.msk");
            let lost_path = args.out.join("composite.lost.msk");
            save_mask(&diff.gained, &gained_path, MaskWriteFormat::Msk1)?;
            println!("wrote {}", gained_path.display());
            save_mask(&diff.lost, &lost_path, MaskWriteFormat::Msk1)?;
            println!("wrote {}", lost_path.display());
        }
    } else if !args.compare.is_empty() {
        return Err(usage(
            "--compare requires --critical to threshold the composites",
        ));
    }
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs) -> CliResult {
    let mut planted = Vec::new();
    for spec in &args.plants {
        let (idx, mode) = spec
            .split_once(':')
            .ok_or_else(|| usage(format!("bad --plant {spec:?}, expected INDEX:MODE")))?;
        let idx: usize = idx
            .parse()
            .map_err(|e| usage(format!("bad plant index: {e}")))?;
        let mode: PlantMode = mode.parse().map_err(usage)?;
        planted.push((idx, mode));
    }
    let config = SynthConfig {
        dims: args.dims.0,
        m: args.studies,
        core_rate: args.core_rate,
        noise_rate: args.noise_rate,
        dropout: args.dropout,
        planted_outliers: planted,
        seed: args.seed,
    };
    let set = generate(&config)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| usage(format!("cannot create {}: {e}", args.out.display())))?;
    let mut studies = Vec::new();
    for mask in set.masks() {
        let file = format!("{}.msk", mask.label());
        save_mask(mask, &args.out.join(&file), MaskWriteFormat::Msk1)?;
        studies.push(ManifestStudy {
            label: mask.label().to_owned(),
            path: PathBuf::from(file),
            format: Some(MaskFormat::Msk1),
        });
    }
    #[derive(Serialize)]
    struct SimManifest {
        studies: Vec<ManifestStudy>,
        config: SynthConfig,
    }
    let manifest = SimManifest { studies, config };
    write_artifact(
        &args.out.join("manifest.json"),
        &serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail"),
    )
}

pub fn cmd_report(args: &ReportArgs) -> CliResult {
    if args.inputs.is_empty() {
        return Err(usage("no JSON artifacts given"));
    }
    let mut matrices: Vec<OverlapMatrix> = Vec::new();
    let mut summaries: Vec<SummaryResult> = Vec::new();
    let mut reports: Vec<OutlierReport> = Vec::new();
    for path in &args.inputs {
        let text = read_to_string(path)?;
        if let Ok(r) = serde_json::from_str::<OutlierReport>(&text) {
            reports.push(r);
        } else if let Ok(s) = serde_json::from_str::<SummaryResult>(&text) {
            summaries.push(s);
        } else if let Ok(m) = serde_json::from_str::<OverlapMatrix>(&text) {
            matrices.push(m);
        } else {
            return Err(usage(format!(
                "{} is not a recognized overlap/summary/outlier artifact",
                path.display()
            )));
        }
    }
    write_artifact(&args.out, &merge_markdown(&matrices, &summaries, &reports))
}

/// Dispatches a parsed command, returning the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Overlap(args) => cmd_overlap(args),
        Command::Summarize(args) => cmd_summarize(args),
        Command::Outliers(args) => cmd_outliers(args),
        Command::Composite(args) => cmd_composite(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Report(args) => cmd_report(args),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
