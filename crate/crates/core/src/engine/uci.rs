//! Client for a UCI-speaking Xiangqi engine (Pikafish and compatibles).
//!
//! Only the subset needed for fixed-depth analysis is used: `uci`,
//! `setoption`, `isready`, `position fen ... [moves ...]`, `go depth N`,
//! `quit`. The last `info ... score` line before `bestmove` is taken as the
//! search result. UCI scores are relative to the side to move and are
//! normalized to Red-positive here.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Instant;

use crate::board::{Move, Position};
use crate::engine::{red_positive, require_legal, EngineError, Evaluation, Oracle, OracleSettings, ENGINE_ENV, MATE_VALUE};
use crate::movegen::{is_legal, legal_moves};
use crate::notation::{move_to_iccs, parse_iccs, to_fen};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineScore {
    Centipawns(i32),
    /// Mate in `n` plies; negative when the side to move is mated.
    Mate(i32),
}

impl EngineScore {
    /// Mover-relative centipawns with mates mapped to `±(30000 - |n|)`.
    pub fn mover_value(self) -> i32 {
        match self {
            EngineScore::Centipawns(cp) => cp,
            EngineScore::Mate(n) if n > 0 => MATE_VALUE - n,
            EngineScore::Mate(n) => -(MATE_VALUE - n.abs()),
        }
    }

    pub fn is_mate(self) -> bool {
        matches!(self, EngineScore::Mate(_))
    }
}

/// Extracts the score from an `info` line, if it carries one.
pub fn parse_info_score(line: &str) -> Option<EngineScore> {
    let mut words = line.split_whitespace();
    if words.next()? != "info" {
        return None;
    }
    while let Some(w) = words.next() {
        if w == "score" {
            let kind = words.next()?;
            let n: i32 = words.next()?.parse().ok()?;
            return match kind {
                "cp" => Some(EngineScore::Centipawns(n)),
                "mate" => Some(EngineScore::Mate(n)),
                _ => None,
            };
        }
    }
    None
}

struct Process {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
}

pub struct UciEngine {
    settings: OracleSettings,
    path: PathBuf,
    process: Option<Process>,
}

impl UciEngine {
    /// Starts the engine at `settings.engine_path`, or at `$XIANGQI_ENGINE`.
    pub fn spawn(settings: OracleSettings) -> Result<UciEngine, EngineError> {
        settings.validate()?;
        let path = settings
            .engine_path
            .clone()
            .or_else(|| std::env::var_os(ENGINE_ENV).map(PathBuf::from))
            .ok_or_else(|| EngineError::Unavailable(format!("no engine path given and ${ENGINE_ENV} unset")))?;
        let mut engine = UciEngine { settings, path, process: None };
        engine.start()?;
        Ok(engine)
    }

    fn start(&mut self) -> Result<(), EngineError> {
        let mut child = Command::new(&self.path)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| EngineError::Unavailable(format!("{}: {e}", self.path.display())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        self.process = Some(Process { child, stdin, lines: rx });

        self.send("uci")?;
        self.wait_for(|l| l.trim() == "uciok")?;
        if self.settings.threads > 1 {
            self.send(&format!("setoption name Threads value {}", self.settings.threads))?;
        }
        self.send("isready")?;
        self.wait_for(|l| l.trim() == "readyok")?;
        Ok(())
    }

    fn stop_process(&mut self) {
        if let Some(mut p) = self.process.take() {
            let _ = writeln!(p.stdin, "quit");
            let _ = p.child.kill();
            let _ = p.child.wait();
        }
    }

    fn send(&mut self, command: &str) -> Result<(), EngineError> {
        let p = self.process.as_mut().ok_or_else(|| EngineError::Unavailable("engine not running".into()))?;
        writeln!(p.stdin, "{command}")?;
        p.stdin.flush()?;
        Ok(())
    }

    fn next_line(&mut self, deadline: Instant) -> Result<String, EngineError> {
        let p = self.process.as_ref().ok_or_else(|| EngineError::Unavailable("engine not running".into()))?;
        let left = deadline.saturating_duration_since(Instant::now());
        match p.lines.recv_timeout(left) {
            Ok(line) => Ok(line),
            Err(RecvTimeoutError::Timeout) => {
                self.stop_process();
                Err(EngineError::Timeout)
            }
            Err(RecvTimeoutError::Disconnected) => {
                self.stop_process();
                Err(EngineError::Unavailable("engine exited".into()))
            }
        }
    }

    fn wait_for(&mut self, done: impl Fn(&str) -> bool) -> Result<(), EngineError> {
        let deadline = Instant::now() + self.settings.timeout;
        loop {
            if done(&self.next_line(deadline)?) {
                return Ok(());
            }
        }
    }

    /// Runs a fixed-depth search and returns the final score and the raw
    /// best-move token (`None` for `(none)`).
    pub fn search(&mut self, position: &Position, moves: &[Move]) -> Result<(EngineScore, Option<String>), EngineError> {
        if self.process.is_none() {
            self.start()?;
        }
        let mut cmd = format!("position fen {} - - 0 1", to_fen(position));
        if !moves.is_empty() {
            cmd.push_str(" moves");
            for m in moves {
                cmd.push(' ');
                cmd.push_str(&move_to_iccs(*m));
            }
        }
        self.send(&cmd)?;
        self.send(&format!("go depth {}", self.settings.depth))?;
        let deadline = Instant::now() + self.settings.timeout;
        let mut score = None;
        loop {
            let line = self.next_line(deadline)?;
            if let Some(s) = parse_info_score(&line) {
                score = Some(s);
                continue;
            }
            let mut words = line.split_whitespace();
            if words.next() == Some("bestmove") {
                let best = words.next().ok_or_else(|| EngineError::Protocol(line.clone()))?;
                let score = score.ok_or_else(|| EngineError::Protocol(line.clone()))?;
                let best = (best != "(none)" && best != "0000").then(|| best.to_owned());
                return Ok((score, best));
            }
        }
    }
}

impl Drop for UciEngine {
    fn drop(&mut self) {
        self.stop_process();
    }
}

impl Oracle for UciEngine {
    fn evaluate(&mut self, position: &Position) -> Result<Evaluation, EngineError> {
        if legal_moves(position).is_empty() {
            return Err(EngineError::GameOver);
        }
        let (score, best) = self.search(position, &[])?;
        let token = best.ok_or_else(|| EngineError::Protocol("bestmove (none) in a live position".into()))?;
        let best_move = parse_iccs(&token)
            .ok()
            .filter(|&m| is_legal(position, m))
            .ok_or(EngineError::IllegalBestMove(token))?;
        Ok(Evaluation {
            value: red_positive(position.side_to_move(), score.mover_value()),
            best_move,
            is_mate_mapped: score.is_mate(),
        })
    }

    fn evaluate_after(&mut self, position: &Position, mv: Move) -> Result<i32, EngineError> {
        let child = require_legal(position, mv)?;
        if legal_moves(&child).is_empty() {
            // the side now to move has lost: mate (or stalemate) in zero
            return Ok(red_positive(child.side_to_move(), EngineScore::Mate(0).mover_value()));
        }
        let (score, _) = self.search(position, &[mv])?;
        Ok(red_positive(child.side_to_move(), score.mover_value()))
    }

    fn depth(&self) -> u32 {
        self.settings.depth
    }

    fn reset(&mut self) -> Result<(), EngineError> {
        self.stop_process();
        self.start()
    }

    fn retries(&self) -> u32 {
        self.settings.retries
    }
}
