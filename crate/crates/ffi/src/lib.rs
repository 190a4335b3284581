//! C ABI over the `evolvability` crate.
//!
//! Every function returns an [`EvoStatus`]; on failure the calling thread's
//! last error message is available from [`evo_last_error_message`]. Handles
//! are opaque and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use evolvability::abstract_models::{run_abstract, AbstractParams, AbstractVariant, ReproductionMode};
use evolvability::analysis::{pearson, Checkpoint, Correlation, RunRecord};
use evolvability::ann_space::{decode, encode, load_table, FixedAnnGenome, LookupTable, GENES};
use evolvability::harness::{run_experiment, ExperimentConfig};
use evolvability::maze::Maze;
use evolvability::seed::seed_stream;
use evolvability::Error;

/// Result codes shared by every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Config = 4,
    Evaluation = 5,
    Integrity = 6,
    Io = 7,
    Format = 8,
    /// Some runs of a battery failed; see the output manifest.
    RunsFailed = 9,
    Panic = 10,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> EvoStatus {
    match err {
        Error::Config(_) => EvoStatus::Config,
        Error::InvalidInput(_) => EvoStatus::InvalidArgument,
        Error::Evaluation(_) => EvoStatus::Evaluation,
        Error::Integrity(_) => EvoStatus::Integrity,
        Error::Io { .. } => EvoStatus::Io,
        Error::Format { .. } | Error::Csv(_) | Error::Json(_) => EvoStatus::Format,
    }
}

fn fail(status: EvoStatus, msg: impl Into<String>) -> EvoStatus {
    set_last_error(msg);
    status
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), EvoStatus>) -> EvoStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EvoStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(EvoStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, EvoStatus>;
}

impl<T> OrStatus<T> for evolvability::Result<T> {
    fn or_status(self) -> Result<T, EvoStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), EvoStatus> {
    if p.is_null() {
        Err(fail(EvoStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, EvoStatus> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(EvoStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

/// Message of the last failure on this thread, or null. Valid until the next
/// call into this library from the same thread.
#[no_mangle]
pub extern "C" fn evo_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn evo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Number of connection genes in a fixed-topology genome.
#[no_mangle]
pub extern "C" fn evo_genome_length() -> usize {
    GENES
}

/// Genotype id of `len` trits (0 neutral, 1 inhibitory, 2 excitatory).
///
/// # Safety
/// `trits` must point to `len` readable bytes; `out_id` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_genotype_encode(trits: *const u8, len: usize, out_id: *mut u64) -> EvoStatus {
    guard(|| {
        non_null(trits, "trits")?;
        non_null(out_id, "out_id")?;
        let slice = std::slice::from_raw_parts(trits, len);
        let genome = FixedAnnGenome::from_trits(slice).or_status()?;
        *out_id = encode(&genome).index();
        Ok(())
    })
}

/// Writes the 18 trits of genotype `id` into `out_trits`.
///
/// # Safety
/// `out_trits` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn evo_genotype_decode(id: u64, out_trits: *mut u8, len: usize) -> EvoStatus {
    guard(|| {
        non_null(out_trits, "out_trits")?;
        if len != GENES {
            return Err(fail(EvoStatus::InvalidArgument, format!("buffer must hold {GENES} trits")));
        }
        let genome = decode(id).map_err(|e| fail(EvoStatus::OutOfRange, e.to_string()))?;
        let out = std::slice::from_raw_parts_mut(out_trits, len);
        for (o, g) in out.iter_mut().zip(genome.genes) {
            *o = g.trit();
        }
        Ok(())
    })
}

/// Pearson correlation; `defined` is 0 when either sample has zero variance.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvoCorrelation {
    pub defined: u8,
    pub n: u64,
    pub r: f64,
    pub p: f64,
    pub slope: f64,
    pub intercept: f64,
}

impl From<Correlation> for EvoCorrelation {
    fn from(c: Correlation) -> Self {
        match c {
            Correlation::Defined(c) => EvoCorrelation {
                defined: 1,
                n: c.n as u64,
                r: c.r,
                p: c.p,
                slope: c.slope,
                intercept: c.intercept,
            },
            Correlation::Undefined { n } => EvoCorrelation {
                n: n as u64,
                r: f64::NAN,
                p: f64::NAN,
                slope: f64::NAN,
                intercept: f64::NAN,
                ..Default::default()
            },
        }
    }
}

/// # Safety
/// `x` and `y` must each point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_pearson(x: *const f64, y: *const f64, n: usize, out: *mut EvoCorrelation) -> EvoStatus {
    guard(|| {
        non_null(x, "x")?;
        non_null(y, "y")?;
        non_null(out, "out")?;
        let xs = std::slice::from_raw_parts(x, n);
        let ys = std::slice::from_raw_parts(y, n);
        *out = pearson(xs, ys).or_status()?.into();
        Ok(())
    })
}

/// A loaded lookup table.
pub struct EvoTable {
    table: LookupTable,
}

/// Opens a table from its manifest, verifying it against the maze file at
/// `maze_path` (null for the built-in maze).
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_table_open(
    manifest_path: *const c_char,
    maze_path: *const c_char,
    out: *mut *mut EvoTable,
) -> EvoStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let manifest = c_str(manifest_path, "manifest_path")?;
        let maze_text = if maze_path.is_null() {
            Maze::default_text().to_string()
        } else {
            let p = c_str(maze_path, "maze_path")?;
            std::fs::read_to_string(p).map_err(|e| fail(EvoStatus::Io, format!("{p}: {e}")))?
        };
        let (_, table) = load_table(Path::new(manifest), &maze_text).or_status()?;
        *out = Box::into_raw(Box::new(EvoTable { table }));
        Ok(())
    })
}

/// # Safety
/// `table` must be null or a handle from [`evo_table_open`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn evo_table_free(table: *mut EvoTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// # Safety
/// `table` must be a live handle; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_table_len(table: *const EvoTable, out_len: *mut u64) -> EvoStatus {
    guard(|| {
        non_null(table, "table")?;
        non_null(out_len, "out_len")?;
        *out_len = (*table).table.len() as u64;
        Ok(())
    })
}

/// Niche and evolvability of the genotype with compact index `compact`.
///
/// # Safety
/// `table` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_table_lookup(
    table: *const EvoTable,
    compact: u64,
    out_niche: *mut u16,
    out_evolvability: *mut u8,
) -> EvoStatus {
    guard(|| {
        non_null(table, "table")?;
        non_null(out_niche, "out_niche")?;
        non_null(out_evolvability, "out_evolvability")?;
        let t = &(*table).table;
        if compact >= t.len() as u64 {
            return Err(fail(EvoStatus::OutOfRange, format!("index {compact} >= {}", t.len())));
        }
        let r = t.get_compact(compact);
        *out_niche = r.niche;
        *out_evolvability = r.evolvability;
        Ok(())
    })
}

/// Parent-offspring evolvability correlation over `samples` random pairs.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_table_heritability(
    table: *const EvoTable,
    samples: usize,
    seed: u64,
    out: *mut EvoCorrelation,
) -> EvoStatus {
    guard(|| {
        non_null(table, "table")?;
        non_null(out, "out")?;
        let mut rng = seed_stream(seed, 0);
        *out = (*table).table.heritability(samples, &mut rng).or_status()?.into();
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvoAbstractVariant {
    Drift = 0,
    Niched = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvoAbstractParams {
    pub init_evolvability: f64,
    pub evo_mut_prob: f64,
    pub evo_mut_halfwidth: f64,
    pub pop_size: u64,
    /// Zero selects the variant's default length.
    pub generations: u64,
    pub niche_capacity: u64,
    pub offspring_per_parent: u64,
    /// 0 independent lineages, 1 resampling.
    pub resampling: u8,
    pub checkpoint_interval: u64,
}

impl From<&AbstractParams> for EvoAbstractParams {
    fn from(p: &AbstractParams) -> Self {
        EvoAbstractParams {
            init_evolvability: p.init_evolvability,
            evo_mut_prob: p.evo_mut_prob,
            evo_mut_halfwidth: p.evo_mut_halfwidth,
            pop_size: p.pop_size as u64,
            generations: p.generations.unwrap_or(0),
            niche_capacity: p.niche_capacity as u64,
            offspring_per_parent: p.offspring_per_parent as u64,
            resampling: u8::from(p.reproduction_mode == ReproductionMode::Resampling),
            checkpoint_interval: p.checkpoint_interval,
        }
    }
}

fn to_usize(v: u64, name: &str) -> Result<usize, EvoStatus> {
    usize::try_from(v).map_err(|_| fail(EvoStatus::InvalidArgument, format!("{name} too large")))
}

impl EvoAbstractParams {
    fn to_params(self) -> Result<AbstractParams, EvoStatus> {
        Ok(AbstractParams {
            init_evolvability: self.init_evolvability,
            evo_mut_prob: self.evo_mut_prob,
            evo_mut_halfwidth: self.evo_mut_halfwidth,
            pop_size: to_usize(self.pop_size, "pop_size")?,
            generations: (self.generations > 0).then_some(self.generations),
            niche_capacity: to_usize(self.niche_capacity, "niche_capacity")?,
            offspring_per_parent: to_usize(self.offspring_per_parent, "offspring_per_parent")?,
            reproduction_mode: if self.resampling != 0 {
                ReproductionMode::Resampling
            } else {
                ReproductionMode::IndependentLineages
            },
            checkpoint_interval: self.checkpoint_interval,
        })
    }
}

/// Fills `out` with the default abstract-model parameters.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_abstract_params_default(out: *mut EvoAbstractParams) -> EvoStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = (&AbstractParams::default()).into();
        Ok(())
    })
}

/// Statistics of one run.
pub struct EvoRecord {
    record: RunRecord,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvoCheckpoint {
    pub checkpoint: u64,
    pub pop_size: u64,
    pub pop_mean_evolvability: f64,
    pub niche_mean_evolvability: f64,
    pub occupied_niches: u64,
    pub cumulative_individuals: u64,
}

impl From<&Checkpoint> for EvoCheckpoint {
    fn from(c: &Checkpoint) -> Self {
        EvoCheckpoint {
            checkpoint: c.checkpoint,
            pop_size: c.pop_size,
            pop_mean_evolvability: c.pop_mean_evolvability,
            niche_mean_evolvability: c.niche_mean_evolvability,
            occupied_niches: c.occupied_niches,
            cumulative_individuals: c.cumulative_individuals,
        }
    }
}

/// Runs one abstract-model simulation.
///
/// # Safety
/// `params` must be readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn evo_abstract_run(
    variant: EvoAbstractVariant,
    params: *const EvoAbstractParams,
    seed: u64,
    out: *mut *mut EvoRecord,
) -> EvoStatus {
    guard(|| {
        non_null(params, "params")?;
        non_null(out, "out")?;
        *out = ptr::null_mut();
        let p = (*params).to_params()?;
        let variant = match variant {
            EvoAbstractVariant::Drift => AbstractVariant::Drift,
            EvoAbstractVariant::Niched => AbstractVariant::Niched,
        };
        let run = run_abstract(&p, variant, seed).or_status()?;
        *out = Box::into_raw(Box::new(EvoRecord { record: run.record }));
        Ok(())
    })
}

/// # Safety
/// `record` must be a live handle; `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_record_len(record: *const EvoRecord, out_len: *mut usize) -> EvoStatus {
    guard(|| {
        non_null(record, "record")?;
        non_null(out_len, "out_len")?;
        *out_len = (*record).record.len();
        Ok(())
    })
}

/// # Safety
/// `record` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn evo_record_row(record: *const EvoRecord, index: usize, out: *mut EvoCheckpoint) -> EvoStatus {
    guard(|| {
        non_null(record, "record")?;
        non_null(out, "out")?;
        let rows = (*record).record.rows();
        let row = rows
            .get(index)
            .ok_or_else(|| fail(EvoStatus::OutOfRange, format!("row {index} >= {}", rows.len())))?;
        *out = row.into();
        Ok(())
    })
}

/// # Safety
/// `record` must be null or a handle from [`evo_abstract_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn evo_record_free(record: *mut EvoRecord) {
    if !record.is_null() {
        drop(Box::from_raw(record));
    }
}

/// Runs the experiment battery described by a JSON config file. Returns
/// `RunsFailed` when the battery completed with failed runs.
///
/// # Safety
/// `config_path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn evo_run_experiment(config_path: *const c_char) -> EvoStatus {
    guard(|| {
        let path = c_str(config_path, "config_path")?;
        let config = ExperimentConfig::load(Path::new(path)).or_status()?;
        let manifest = run_experiment(&config).or_status()?;
        if manifest.succeeded() {
            Ok(())
        } else {
            Err(fail(
                EvoStatus::RunsFailed,
                format!("{} runs failed", manifest.failures.len()),
            ))
        }
    })
}
