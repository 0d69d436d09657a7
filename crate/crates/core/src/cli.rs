//! The `xiangqi` command line. Structured output is line-delimited JSON
//! unless `--pretty` asks for a table; failures print one JSON error record
//! on stderr.

use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::board::Position;
use crate::dataset::{
    build_prompt, build_stage_files, default_keywords, write_outputs, HttpSanitizer, IdentitySanitizer, PipelineConfig,
    PromptMode, Sanitizer, SanitizerFailure, Source, SituationLabel5, TestRecord,
};
use crate::engine::{map_positions, OracleSettings, OracleSpec, ENGINE_ENV};
use crate::movegen::{game_status, is_in_check, legal_moves, perft};
use crate::notation::pgn::{decode_text, write_pgn, MoveFormat, TextEncoding};
use crate::notation::{move_to_cff, move_to_iccs, parse_cff, parse_fen, parse_iccs, parse_pgn, to_fen};
use crate::reward::{
    compute_metrics, group_relative_advantage, join_transcripts, parse_response, read_jsonl, render_report,
    total_reward, ClassGating, Granularity, GroupBy, MetricsConfig, ResponseFormat, RewardConfig, TranscriptRecord,
};

#[derive(Debug, Parser)]
#[command(name = "xiangqi", version, about = "Xiangqi rules, notation, dataset and evaluation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a FEN and print its normalized form and status.
    Fen {
        fen: String,
        #[arg(long)]
        pretty: bool,
    },
    /// Render a position as a text grid.
    Board {
        fen: String,
        #[arg(long, value_enum, default_value_t = Glyphs::Ascii)]
        glyphs: Glyphs,
    },
    /// List legal moves, one per line.
    Moves {
        fen: String,
        #[arg(long, value_enum, default_value_t = Notation::Iccs)]
        notation: Notation,
    },
    /// Count leaf nodes of the legal move tree.
    Perft { fen: String, depth: u32 },
    /// Convert a move between ICCS and Chinese notation.
    Convert {
        fen: String,
        #[arg(name = "move")]
        token: String,
        /// Target notation; defaults to the one the input is not in.
        #[arg(long, value_enum)]
        to: Option<Notation>,
    },
    /// Parse a PGN file into game and reject records.
    ParsePgn {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Encoding::Auto)]
        encoding: Encoding,
        /// Re-emit the parsed games as PGN instead of JSON records.
        #[arg(long, value_enum)]
        emit: Option<Notation>,
    },
    /// Score every legal move of one or more positions.
    Score {
        fen: Option<String>,
        /// File with one FEN per line.
        #[arg(long, conflicts_with = "fen")]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Build the stage and test files from a directory of PGN files.
    BuildDataset {
        pgn_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        sigma_good: i32,
        #[arg(long, default_value_t = 100)]
        sigma_s: i32,
        #[arg(long, default_value_t = 800)]
        sigma_l: i32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Test positions per piece count, half per side.
        #[arg(long, default_value_t = 100)]
        test_per_count: usize,
        /// One keyword per line; replaces the built-in list.
        #[arg(long)]
        keywords_file: Option<PathBuf>,
        /// POST endpoint that returns cleaned comment text.
        #[arg(long)]
        sanitizer_url: Option<String>,
        #[arg(long, value_enum, default_value_t = OnFailure::Drop)]
        on_sanitizer_failure: OnFailure,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Print the model prompt for a position.
    Prompt {
        fen: String,
        #[arg(long, value_enum, default_value_t = Mode::Full)]
        mode: Mode,
    },
    /// Reward one response, or turn a group of rewards into advantages.
    Reward {
        #[arg(required_unless_present = "group")]
        fen: Option<String>,
        /// Response text; read from stdin when omitted.
        #[arg(long)]
        response: Option<String>,
        /// True situation label, e.g. slight_adv_red.
        #[arg(long, value_parser = parse_label5, required_unless_present = "group")]
        truth: Option<SituationLabel5>,
        #[arg(long, value_enum, default_value_t = Format::Tagged)]
        format: Format,
        #[arg(long, value_enum, default_value_t = Classes::Five)]
        granularity: Classes,
        #[arg(long, default_value_t = 100)]
        sigma_good: i32,
        /// Comma-separated rewards of one sampling group.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true, conflicts_with_all = ["fen", "truth", "response"])]
        group: Option<Vec<f64>>,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Compute @k metrics for a test file and response transcripts.
    Evaluate {
        test_file: PathBuf,
        transcripts: PathBuf,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        pretty: bool,
    },
    /// Metric breakdowns by piece count or by moved piece kind.
    Report {
        test_file: PathBuf,
        transcripts: PathBuf,
        #[arg(long, value_enum)]
        group_by: Grouping,
        #[command(flatten)]
        eval: EvalArgs,
        #[arg(long)]
        pretty: bool,
    },
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// UCI engine binary; without one the material evaluator is used.
    #[arg(long, env = ENGINE_ENV)]
    engine: Option<PathBuf>,
    #[arg(long, default_value_t = crate::engine::DEFAULT_DEPTH)]
    depth: u32,
    #[arg(long, default_value_t = 1)]
    threads: u32,
    #[arg(long, default_value_t = 120)]
    timeout_secs: u64,
}

impl OracleArgs {
    fn spec(&self) -> OracleSpec {
        match &self.engine {
            Some(path) => OracleSpec::Uci(OracleSettings {
                depth: self.depth,
                engine_path: Some(path.clone()),
                threads: self.threads,
                timeout: Duration::from_secs(self.timeout_secs),
                ..Default::default()
            }),
            None => OracleSpec::Material,
        }
    }
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long, value_enum, default_value_t = Format::Tagged)]
    format: Format,
    /// Comma-separated k values.
    #[arg(long, value_delimiter = ',', default_value = "1,3")]
    k: Vec<usize>,
    #[arg(long, value_enum, default_value_t = Gating::Joint)]
    gating: Gating,
    #[arg(long, default_value_t = 100)]
    sigma_good: i32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Glyphs {
    Ascii,
    Chinese,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Notation {
    Iccs,
    Cff,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Encoding {
    Auto,
    Utf8,
    Gb18030,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Stage1,
    Full,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Tagged,
    Labeled,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Classes {
    #[value(name = "3")]
    Three,
    #[value(name = "5")]
    Five,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Gating {
    Joint,
    FirstLegal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OnFailure {
    Drop,
    KeepRaw,
    Abort,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Grouping {
    #[value(name = "piece_count", alias = "piece-count")]
    PieceCount,
    #[value(name = "piece_kind", alias = "piece-kind", alias = "moved_piece_kind")]
    PieceKind,
}

impl From<Format> for ResponseFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Tagged => ResponseFormat::Tagged,
            Format::Labeled => ResponseFormat::Labeled,
        }
    }
}

fn parse_label5(s: &str) -> Result<SituationLabel5, String> {
    SituationLabel5::ALL
        .into_iter()
        .find(|l| l.code() == s)
        .ok_or_else(|| format!("expected one of: {}", SituationLabel5::ALL.map(|l| l.code()).join(", ")))
}

/// Operational failure: reported as `{"error": kind, "message": ..}`.
struct Failure {
    kind: &'static str,
    message: String,
}

fn fail(kind: &'static str, e: impl std::fmt::Display) -> Failure {
    Failure { kind, message: e.to_string() }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        fail("io", e)
    }
}

type Out<'a> = &'a mut dyn Write;

fn line<T: Serialize>(out: Out, value: &T) -> Result<(), Failure> {
    serde_json::to_writer(&mut *out, value).map_err(|e| fail("io", e))?;
    out.write_all(b"\n")?;
    Ok(())
}

fn position(fen: &str) -> Result<Position, Failure> {
    parse_fen(fen).map_err(|e| fail("bad_fen", e))
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| fail("io", format!("{}: {e}", path.display())))
}

/// Runs the tool with `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let record = json!({"error": "usage", "message": e.render().to_string().trim_end()});
            let _ = writeln!(stderr, "{record}");
            return 2;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "{}", json!({"error": f.kind, "message": f.message}));
            1
        }
    }
}

fn dispatch(command: Command, out: Out) -> Result<(), Failure> {
    match command {
        Command::Fen { fen, pretty } => {
            let p = position(&fen)?;
            if pretty {
                writeln!(out, "{}", to_fen(&p))?;
            } else {
                line(
                    out,
                    &json!({
                        "fen": to_fen(&p),
                        "side_to_move": p.side_to_move(),
                        "piece_count": p.piece_count(),
                        "in_check": is_in_check(&p, p.side_to_move()),
                        "status": game_status(&p),
                    }),
                )?;
            }
        }
        Command::Board { fen, glyphs } => {
            let p = position(&fen)?;
            match glyphs {
                Glyphs::Ascii => write!(out, "{}", p.render_boardstr())?,
                Glyphs::Chinese => write!(out, "{}", p.render_board_chinese())?,
            }
        }
        Command::Moves { fen, notation } => {
            let p = position(&fen)?;
            for mv in legal_moves(&p) {
                match notation {
                    Notation::Iccs => writeln!(out, "{}", move_to_iccs(mv))?,
                    Notation::Cff => writeln!(out, "{}", move_to_cff(&p, mv).map_err(|e| fail("bad_move", e))?)?,
                }
            }
        }
        Command::Perft { fen, depth } => {
            let p = position(&fen)?;
            writeln!(out, "{}", perft(&p, depth))?;
        }
        Command::Convert { fen, token, to } => {
            let p = position(&fen)?;
            let (mv, from) = match parse_iccs(&token) {
                Ok(mv) => (mv, Notation::Iccs),
                Err(_) => (parse_cff(&p, &token).map_err(|e| fail("bad_move", e))?, Notation::Cff),
            };
            if !crate::movegen::is_legal(&p, mv) {
                return Err(fail("illegal_move", format!("{token} is not legal here")));
            }
            let to = to.unwrap_or(if from == Notation::Iccs { Notation::Cff } else { Notation::Iccs });
            match to {
                Notation::Iccs => writeln!(out, "{}", move_to_iccs(mv))?,
                Notation::Cff => writeln!(out, "{}", move_to_cff(&p, mv).map_err(|e| fail("bad_move", e))?)?,
            }
        }
        Command::ParsePgn { file, encoding, emit } => {
            let encoding = match encoding {
                Encoding::Auto => TextEncoding::Auto,
                Encoding::Utf8 => TextEncoding::Utf8,
                Encoding::Gb18030 => TextEncoding::Gb18030,
            };
            let batch = parse_pgn(&decode_text(&read_file(&file)?, encoding));
            if let Some(n) = emit {
                let format = if n == Notation::Iccs { MoveFormat::Iccs } else { MoveFormat::Cff };
                for g in &batch.games {
                    writeln!(out, "{}", write_pgn(g, format))?;
                }
                return Ok(());
            }
            for g in &batch.games {
                line(
                    out,
                    &json!({
                        "type": "game",
                        "index": g.index,
                        "result": g.result.as_tag(),
                        "start_fen": to_fen(&g.start),
                        "moves": g.plies.iter().map(|p| move_to_iccs(p.mv)).collect::<Vec<_>>(),
                        "comments": g.plies.iter().map(|p| p.comment.clone()).collect::<Vec<_>>(),
                        "tags": g.metadata.iter().map(|(k, v)| json!([k, v])).collect::<Vec<_>>(),
                    }),
                )?;
            }
            for r in &batch.rejects {
                line(out, &json!({"type": "reject", "game_index": r.game_index, "reason": r.reason}))?;
            }
            for w in &batch.warnings {
                line(out, &json!({"type": "warning", "game_index": w.game_index, "message": w.message}))?;
            }
        }
        Command::Score { fen, input, jobs, oracle } => {
            let fens: Vec<String> = match (fen, input) {
                (Some(f), _) => vec![f],
                (None, Some(path)) => String::from_utf8_lossy(&read_file(&path)?)
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_owned)
                    .collect(),
                (None, None) => return Err(fail("usage", "give a FEN or --input")),
            };
            let positions = fens.iter().map(|f| position(f)).collect::<Result<Vec<_>, _>>()?;
            let results = map_positions(&positions, jobs, &oracle.spec(), |o, p| o.score_all_moves(p))
                .map_err(|e| fail("engine", e))?;
            for r in results {
                let set = r.map_err(|e| fail("engine", e))?;
                writeln!(out, "{}", set.to_json_line())?;
            }
        }
        Command::BuildDataset {
            pgn_dir,
            out: out_dir,
            sigma_good,
            sigma_s,
            sigma_l,
            seed,
            test_per_count,
            keywords_file,
            sanitizer_url,
            on_sanitizer_failure,
            jobs,
            oracle,
        } => {
            let keywords = match keywords_file {
                Some(path) => String::from_utf8_lossy(&read_file(&path)?)
                    .lines()
                    .map(str::trim)
                    .filter(|l| !l.is_empty())
                    .map(str::to_owned)
                    .collect(),
                None => default_keywords(),
            };
            let config = PipelineConfig {
                sigma_good,
                sigma_s,
                sigma_l,
                keywords,
                seed,
                test_per_piece_count: test_per_count,
                on_sanitizer_failure: match on_sanitizer_failure {
                    OnFailure::Drop => SanitizerFailure::Drop,
                    OnFailure::KeepRaw => SanitizerFailure::KeepRaw,
                    OnFailure::Abort => SanitizerFailure::Abort,
                },
                jobs,
                ..Default::default()
            };
            let sources = read_sources(&pgn_dir)?;
            let http;
            let sanitizer: &dyn Sanitizer = match sanitizer_url {
                Some(url) => {
                    http = HttpSanitizer::new(url);
                    &http
                }
                None => &IdentitySanitizer,
            };
            let output = build_stage_files(&sources, &config, &oracle.spec(), sanitizer).map_err(|e| fail("pipeline", e))?;
            write_outputs(&output, &out_dir)?;
            line(out, &json!({"funnel": output.funnel, "test_shortfalls": output.shortfalls}))?;
        }
        Command::Prompt { fen, mode } => {
            let p = position(&fen)?;
            let mode = match mode {
                Mode::Stage1 => PromptMode::Stage1,
                Mode::Full => PromptMode::Full,
            };
            write!(out, "{}", build_prompt(&p, mode))?;
        }
        Command::Reward { fen, response, truth, format, granularity, sigma_good, group, oracle } => {
            if let Some(group) = group {
                let adv = group_relative_advantage(&group).map_err(|e| fail("bad_group", e))?;
                line(out, &json!({"advantages": adv}))?;
                return Ok(());
            }
            let p = position(fen.as_deref().unwrap_or_default())?;
            let raw = match response {
                Some(r) => r,
                None => io::read_to_string(io::stdin())?,
            };
            let mut o = oracle.spec().build().map_err(|e| fail("engine", e))?;
            let scored = o.score_all_moves(&p).map_err(|e| fail("engine", e))?;
            let parsed = parse_response(&raw, format.into());
            let config = RewardConfig {
                sigma_good,
                granularity: match granularity {
                    Classes::Three => Granularity::Three,
                    Classes::Five => Granularity::Five,
                },
            };
            let breakdown = total_reward(&parsed, &scored, truth.expect("required by clap"), &config);
            line(out, &json!({"reward": breakdown, "response": parsed}))?;
        }
        Command::Evaluate { test_file, transcripts, eval, pretty } => {
            let report = evaluate(&test_file, &transcripts, &eval)?;
            if pretty {
                write!(out, "{}", render_report(&report, GroupBy::None))?;
            } else {
                line(out, &report)?;
            }
        }
        Command::Report { test_file, transcripts, group_by, eval, pretty } => {
            let report = evaluate(&test_file, &transcripts, &eval)?;
            let g = match group_by {
                Grouping::PieceCount => GroupBy::PieceCount,
                Grouping::PieceKind => GroupBy::PieceKind,
            };
            if pretty {
                write!(out, "{}", render_report(&report, g))?;
            } else {
                match g {
                    GroupBy::PieceKind => line(
                        out,
                        &json!({"by_piece_kind": report.by_piece_kind, "unattributed_responses": report.unattributed_responses}),
                    )?,
                    _ => line(out, &json!({"ks": report.ks, "by_piece_count": report.by_piece_count}))?,
                }
            }
        }
    }
    Ok(())
}

fn read_sources(path: &Path) -> Result<Vec<Source>, Failure> {
    let mut files = Vec::new();
    if path.is_dir() {
        for entry in fs::read_dir(path)? {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgn")) {
                files.push(p);
            }
        }
        files.sort();
    } else {
        files.push(path.to_owned());
    }
    files
        .into_iter()
        .map(|f| {
            let text = decode_text(&read_file(&f)?, TextEncoding::Auto);
            let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(Source { name, batch: parse_pgn(&text) })
        })
        .collect()
}

fn evaluate(test_file: &Path, transcripts: &Path, eval: &EvalArgs) -> Result<crate::reward::MetricsReport, Failure> {
    let tests: Vec<TestRecord> =
        read_jsonl(BufReader::new(fs::File::open(test_file)?)).map_err(|e| fail("bad_test_file", e))?;
    let records: Vec<TranscriptRecord> =
        read_jsonl(BufReader::new(fs::File::open(transcripts)?)).map_err(|e| fail("bad_transcripts", e))?;
    let joined = join_transcripts(&tests, &records, eval.format.into()).map_err(|e| fail("bad_transcripts", e))?;
    let config = MetricsConfig {
        ks: eval.k.clone(),
        sigma_good: eval.sigma_good,
        gating: match eval.gating {
            Gating::Joint => ClassGating::JointPerResponse,
            Gating::FirstLegal => ClassGating::FirstLegal,
        },
    };
    compute_metrics(&joined.items, &joined.responses, &config).map_err(|e| fail("metrics", e))
}
