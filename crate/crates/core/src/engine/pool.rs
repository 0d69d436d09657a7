use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::board::Position;
use crate::engine::{EngineError, MaterialOracle, Oracle, OracleSettings, UciEngine};

/// Recipe for building one oracle per worker.
#[derive(Debug, Clone)]
pub enum OracleSpec {
    Material,
    Uci(OracleSettings),
}

impl OracleSpec {
    pub fn build(&self) -> Result<Box<dyn Oracle + Send>, EngineError> {
        Ok(match self {
            OracleSpec::Material => Box::new(MaterialOracle),
            OracleSpec::Uci(settings) => Box::new(UciEngine::spawn(settings.clone())?),
        })
    }

    /// The engine when a path is configured (flag or environment), the
    /// material fallback otherwise.
    pub fn from_settings(settings: OracleSettings) -> OracleSpec {
        let has_engine = settings.engine_path.is_some() || std::env::var_os(super::ENGINE_ENV).is_some();
        if has_engine {
            OracleSpec::Uci(settings)
        } else {
            OracleSpec::Material
        }
    }
}

/// Applies `work` to every position with `jobs` workers, each owning its own
/// oracle. Each position is handled by exactly one worker; results come back
/// in input order.
pub fn map_positions<T, F>(
    positions: &[Position],
    jobs: usize,
    spec: &OracleSpec,
    work: F,
) -> Result<Vec<Result<T, EngineError>>, EngineError>
where
    T: Send,
    F: Fn(&mut dyn Oracle, &Position) -> Result<T, EngineError> + Sync,
{
    let jobs = jobs.clamp(1, positions.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Result<T, EngineError>)>> = Mutex::new(Vec::with_capacity(positions.len()));
    let mut oracles = Vec::with_capacity(jobs);
    for _ in 0..jobs {
        oracles.push(spec.build()?);
    }
    thread::scope(|scope| {
        for mut oracle in oracles {
            let (next, results, work) = (&next, &results, &work);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(position) = positions.get(i) else { break };
                let r = work(oracle.as_mut(), position);
                results.lock().unwrap().push((i, r));
            });
        }
    });
    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|(i, _)| *i);
    Ok(results.into_iter().map(|(_, r)| r).collect())
}
