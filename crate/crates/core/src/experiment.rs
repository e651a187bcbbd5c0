//! Slab sampling, plane-hit statistics against a uniform null model, and the
//! census of the xor/arithmetic cases along a generator run.
//!
//! Only triples whose first coordinate falls in the thin slab `x < 2^-k` are
//! kept; their `x` is magnified by `2^k` for plotting. Hit statistics are
//! always computed on the unmagnified coordinates.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::bitlin::{Shift, Word64};
use crate::control::ControlGen;
use crate::engine::{next_word, seed, to_unit, GenState, Params};
use crate::error::Error;
use crate::planes::{self, family, min_dist_index, Grid, PlaneFamily, Point3};
use crate::xorapprox::{
    arithmetic_agreement, classify_inner, classify_outer, compound_probability, outer_operand,
    CaseLabel,
};

/// Scan cap when every triple is converted to floats.
pub const DEFAULT_SCAN_CAP: u64 = 1 << 32;
/// Scan cap in fast-forward mode; covers 10000 slab points at `2^-23`.
pub const DEFAULT_FAST_SCAN_CAP: u64 = 1 << 37;
pub const DEFAULT_TARGET_POINTS: usize = 1000;
pub const FULL_SCALE_TARGET_POINTS: usize = 10000;
pub const DEFAULT_EPS: f64 = 1.0 / 1024.0;
pub const DEFAULT_CONTROL_POINTS: usize = 100_000;
pub const DEFAULT_CONTROL_SEED: u64 = 0xC0FFEE;
pub const DEFAULT_CENSUS_STEPS: u64 = 1_000_000;
/// Points per control substream.
const CONTROL_CHUNK: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanMode {
    /// Test the slab condition on the raw output word; only compute `y, z`
    /// for accepted triples.
    FastForward,
    /// Convert every triple to floats, then filter.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SlabSpec {
    magnify_exp: u32,
    pub target_points: usize,
    pub scan_cap: u64,
}

impl SlabSpec {
    pub fn new(magnify_exp: u32, target_points: usize, scan_cap: u64) -> Result<Self, Error> {
        if !(1..=52).contains(&magnify_exp) {
            return Err(Error::MagnifyExponent(magnify_exp));
        }
        if target_points == 0 {
            return Err(Error::NonPositive("target_points"));
        }
        if scan_cap == 0 {
            return Err(Error::NonPositive("scan_cap"));
        }
        Ok(SlabSpec {
            magnify_exp,
            target_points,
            scan_cap,
        })
    }

    pub fn magnify_exp(&self) -> u32 {
        self.magnify_exp
    }

    /// `2^-k`
    pub fn x_max(&self) -> f64 {
        2f64.powi(-(self.magnify_exp as i32))
    }

    /// `2^k`
    pub fn magnify(&self) -> f64 {
        2f64.powi(self.magnify_exp as i32)
    }

    /// `to_unit(o) < 2^-k` exactly when `o < 2^(64-k)`.
    pub fn word_limit(&self) -> u64 {
        1u64 << (64 - self.magnify_exp)
    }
}

#[derive(Clone, Debug)]
pub struct SlabSample {
    /// Magnified points `(2^k x, y, z)`.
    pub points: Vec<Point3>,
    pub scanned: u64,
    pub truncated: bool,
}

/// Scans overlapping triples from `state` and keeps those with `x < 2^-k`.
pub fn slab_sample(state: GenState, spec: &SlabSpec, mode: ScanMode) -> SlabSample {
    match mode {
        ScanMode::FastForward => slab_sample_fast(state, spec),
        ScanMode::Full => slab_sample_full(state, spec),
    }
}

/// Advances `(s0, s1)` until the output word is below `limit` or `block`
/// steps pass. Returns the number of steps taken and the accepted word; on
/// return `(s0, s1)` is one step past the accepted output.
#[inline(always)]
fn scan_block<F: Fn(u64, u64) -> u64>(
    s: &mut (u64, u64),
    limit: u64,
    block: u64,
    advance: F,
) -> (u64, Option<u64>) {
    let (mut s0, mut s1) = *s;
    for i in 0..block {
        let x = s0.wrapping_add(s1);
        let s2 = advance(s0, s1);
        s0 = s1;
        s1 = s2;
        if x < limit {
            *s = (s0, s1);
            return (i + 1, Some(x));
        }
    }
    *s = (s0, s1);
    (block, None)
}

fn scan_block_const<const A: u32, const B: u32, const C: u32>(
    s: &mut (u64, u64),
    limit: u64,
    block: u64,
) -> (u64, Option<u64>) {
    scan_block(s, limit, block, |s0, s1| {
        let t = s0 ^ (s0 << A);
        t ^ (t >> B) ^ s1 ^ (s1 >> C)
    })
}

fn slab_sample_fast(state: GenState, spec: &SlabSpec) -> SlabSample {
    let params = *state.params();
    let (a, b, c) = (params.a().get(), params.b().get(), params.c().get());
    let scan = |s: &mut (u64, u64), limit, block| match (a, b, c) {
        (23, 17, 26) => scan_block_const::<23, 17, 26>(s, limit, block),
        _ => scan_block(s, limit, block, |s0, s1| {
            let t = s0 ^ (s0 << a);
            t ^ (t >> b) ^ s1 ^ (s1 >> c)
        }),
    };
    let mut words = state.words();
    let limit = spec.word_limit();
    let magnify = spec.magnify();
    let mut points = Vec::with_capacity(spec.target_points);
    let mut scanned = 0u64;
    while points.len() < spec.target_points && scanned < spec.scan_cap {
        let block = (spec.scan_cap - scanned).min(1 << 24);
        let (used, hit) = scan(&mut words, limit, block);
        scanned += used;
        if let Some(x) = hit {
            let (s0, s1) = words;
            let s2 = next_word(s0, s1, &params);
            points.push(Point3 {
                x: magnify * to_unit(x),
                y: to_unit(s0.wrapping_add(s1)),
                z: to_unit(s1.wrapping_add(s2)),
            });
        }
    }
    SlabSample {
        truncated: points.len() < spec.target_points,
        points,
        scanned,
    }
}

fn slab_sample_full(state: GenState, spec: &SlabSpec) -> SlabSample {
    let x_max = spec.x_max();
    let magnify = spec.magnify();
    let mut outputs = state.outputs().map(to_unit);
    let mut window = [
        outputs.next().expect("infinite"),
        outputs.next().expect("infinite"),
        0.0,
    ];
    let mut points = Vec::with_capacity(spec.target_points);
    let mut scanned = 0u64;
    while points.len() < spec.target_points && scanned < spec.scan_cap {
        window[2] = outputs.next().expect("infinite");
        scanned += 1;
        let [x, y, z] = window;
        if x < x_max {
            points.push(Point3 {
                x: magnify * x,
                y,
                z,
            });
        }
        window = [y, z, 0.0];
    }
    SlabSample {
        truncated: points.len() < spec.target_points,
        points,
        scanned,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitStats {
    pub n_points: u64,
    pub hits: u64,
    pub hit_fraction: f64,
    /// Hits attributed to the nearest plane, in family order.
    pub per_plane_hits: [u64; 8],
}

fn count_hits<I: Iterator<Item = Point3>>(points: I, fam: &PlaneFamily, eps: f64) -> HitStats {
    let mut per_plane_hits = [0u64; 8];
    let mut n_points = 0u64;
    for p in points {
        n_points += 1;
        let (idx, d) = min_dist_index(&p, fam);
        if d <= eps {
            per_plane_hits[idx] += 1;
        }
    }
    let hits = per_plane_hits.iter().sum();
    HitStats {
        n_points,
        hits,
        hit_fraction: if n_points == 0 {
            0.0
        } else {
            hits as f64 / n_points as f64
        },
        per_plane_hits,
    }
}

/// Fraction of magnified slab points within `eps` (vertically, mod 1) of some
/// plane of the family.
pub fn hit_stats(
    points: &[Point3],
    fam: &PlaneFamily,
    eps: f64,
    spec: &SlabSpec,
) -> Result<HitStats, Error> {
    if points.is_empty() {
        return Err(Error::NoPoints);
    }
    let magnify = spec.magnify();
    Ok(count_hits(
        points.iter().map(|p| Point3 {
            x: p.x / magnify,
            ..*p
        }),
        fam,
        eps,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ControlBaseline {
    pub n_points: u64,
    pub hits: u64,
    pub hit_fraction: f64,
    /// `min(16 eps, 1)`: measure of the union of eight slabs of height `2 eps`.
    pub analytic: f64,
    /// Binomial standard deviation at the analytic rate.
    pub sigma: f64,
}

/// The hit statistic on uniform points of the whole unit cube drawn from the
/// control generator. Chunks use separate substreams and are evaluated in
/// parallel; the counts do not depend on scheduling.
pub fn control_baseline(
    n_points: usize,
    fam: &PlaneFamily,
    eps: f64,
    control_seed: Word64,
) -> ControlBaseline {
    let n_chunks = n_points.div_ceil(CONTROL_CHUNK);
    let hits: u64 = (0..n_chunks)
        .into_par_iter()
        .map(|k| {
            let len = CONTROL_CHUNK.min(n_points - k * CONTROL_CHUNK);
            let mut g = ControlGen::new(control_seed, k as u64);
            count_hits((0..len).map(|_| g.next_point()), fam, eps).hits
        })
        .sum();
    let analytic = (16.0 * eps).min(1.0);
    let n = n_points as u64;
    ControlBaseline {
        n_points: n,
        hits,
        hit_fraction: if n == 0 { 0.0 } else { hits as f64 / n as f64 },
        analytic,
        sigma: if n == 0 {
            0.0
        } else {
            (analytic * (1.0 - analytic) / n as f64).sqrt()
        },
    }
}

/// Frequencies of the inner and outer cases along consecutive states.
///
/// Rows of `grid` are the outer cases `+, -, t-`; columns the inner cases
/// `1+2^a, 1-2^a, 2^a-1`. A step may satisfy several cells.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseCensus {
    pub source: &'static str,
    pub n_steps: u64,
    pub n_bits: u32,
    pub grid_counts: [[u64; 3]; 3],
    pub grid: [[f64; 3]; 3],
    pub outer_frequencies: [f64; 3],
    pub inner_frequencies: [f64; 3],
    /// Some outer case and some inner case both hold.
    pub compound: f64,
    /// `((3/4)^n)^2 · 3)^2`, the estimate from independent uniform bits.
    pub analytic_estimate: f64,
    /// Single-step label frequencies `A_i, B_i, C_i` and `A'_i, B'_i, C'_i`.
    pub inner_label_frequencies: [f64; 3],
    pub outer_label_frequencies: [f64; 3],
    /// Among labelled pairs, how often the full-width arithmetic still
    /// differs from the xor on the top bits (carry or borrow from below).
    pub carry_leak_frequency: f64,
}

#[derive(Default)]
struct CensusAcc {
    steps: u64,
    grid: [[u64; 3]; 3],
    outer: [u64; 3],
    inner: [u64; 3],
    compound: u64,
    inner_labels: [u64; 3],
    outer_labels: [u64; 3],
    leak_checks: u64,
    leaks: u64,
}

fn label_flags(l: CaseLabel) -> [bool; 3] {
    [l.in_a, l.in_b, l.in_c]
}

impl CensusAcc {
    fn leak(&mut self, label: CaseLabel, u: Word64, v: Word64, n: u32) {
        let (sum, diff, rdiff) = arithmetic_agreement(u, v, n);
        for (flag, ok) in label_flags(label).into_iter().zip([sum, diff, rdiff]) {
            if flag {
                self.leak_checks += 1;
                self.leaks += !ok as u64;
            }
        }
    }

    fn tally(&mut self, s0: Word64, s1: Word64, s2: Word64, a: Shift, n: u32) {
        let t0 = outer_operand(s0, a);
        let t1 = outer_operand(s1, a);
        let in0 = classify_inner(s0, a, n).expect("width checked");
        let in1 = classify_inner(s1, a, n).expect("width checked");
        let out0 = classify_outer(s1, t0, n).expect("width checked");
        let out1 = classify_outer(s2, t1, n).expect("width checked");

        let inner = [
            in0.in_a && in1.in_a,
            in0.in_b && in1.in_b,
            in0.in_c && in1.in_c,
        ];
        let outer = [
            out0.in_a && out1.in_a,
            out0.in_b && out1.in_b,
            out0.in_c && out1.in_c,
        ];
        self.steps += 1;
        for o in 0..3 {
            self.outer[o] += outer[o] as u64;
            self.inner[o] += inner[o] as u64;
            for (k, &inn) in inner.iter().enumerate() {
                self.grid[o][k] += (outer[o] && inn) as u64;
            }
        }
        self.compound += (outer.iter().any(|&b| b) && inner.iter().any(|&b| b)) as u64;
        for (i, f) in label_flags(in0).into_iter().enumerate() {
            self.inner_labels[i] += f as u64;
        }
        for (i, f) in label_flags(out0).into_iter().enumerate() {
            self.outer_labels[i] += f as u64;
        }
        self.leak(in0, s0, crate::bitlin::shl(s0, a), n);
        self.leak(out0, s1, t0, n);
    }

    fn finish(self, source: &'static str, n_bits: u32) -> CaseCensus {
        let n = self.steps.max(1) as f64;
        let f = |c: u64| c as f64 / n;
        CaseCensus {
            source,
            n_steps: self.steps,
            n_bits,
            grid_counts: self.grid,
            grid: self.grid.map(|row| row.map(f)),
            outer_frequencies: self.outer.map(f),
            inner_frequencies: self.inner.map(f),
            compound: f(self.compound),
            analytic_estimate: compound_probability(n_bits)
                .map(|p| p.value)
                .unwrap_or(f64::NAN),
            inner_label_frequencies: self.inner_labels.map(f),
            outer_label_frequencies: self.outer_labels.map(f),
            carry_leak_frequency: if self.leak_checks == 0 {
                0.0
            } else {
                self.leaks as f64 / self.leak_checks as f64
            },
        }
    }
}

fn check_census_args(n_steps: u64, n_bits: u32) -> Result<(), Error> {
    if n_steps == 0 {
        return Err(Error::NonPositive("n_steps"));
    }
    if !(1..=crate::xorapprox::MAX_CLASSIFY_WIDTH).contains(&n_bits) {
        return Err(Error::WidthOutOfRange {
            n: n_bits,
            min: 1,
            max: crate::xorapprox::MAX_CLASSIFY_WIDTH,
        });
    }
    Ok(())
}

/// Case census along the generator: step `i` classifies the operands of the
/// two summands of `z` built from `s_i, s_{i+1}, s_{i+2}`.
pub fn case_census(state: GenState, n_steps: u64, n_bits: u32) -> Result<CaseCensus, Error> {
    check_census_args(n_steps, n_bits)?;
    let params = *state.params();
    let a = params.a();
    let (mut s0, mut s1) = state.words();
    let mut acc = CensusAcc::default();
    for _ in 0..n_steps {
        let s2 = next_word(s0, s1, &params);
        acc.tally(s0, s1, s2, a, n_bits);
        s0 = s1;
        s1 = s2;
    }
    Ok(acc.finish("xorshift128+", n_bits))
}

/// The same census on independent uniform words from the control generator.
pub fn case_census_uniform(
    control_seed: Word64,
    a: Shift,
    n_steps: u64,
    n_bits: u32,
) -> Result<CaseCensus, Error> {
    check_census_args(n_steps, n_bits)?;
    let mut g = ControlGen::new(control_seed, u64::MAX);
    let mut acc = CensusAcc::default();
    for _ in 0..n_steps {
        let (s0, s1, s2) = (g.next_u64(), g.next_u64(), g.next_u64());
        acc.tally(s0, s1, s2, a, n_bits);
    }
    Ok(acc.finish("uniform", n_bits))
}

/// Everything needed for one reproducible run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub params: Params,
    pub seed: Word64,
    pub eps: f64,
    pub slab: SlabSpec,
    pub mode: ScanMode,
    pub control_points: usize,
    pub control_seed: Word64,
    pub census_steps: u64,
    pub n_bits: u32,
    pub grid: Grid,
}

impl ExperimentConfig {
    /// Defaults for `params`: magnification `2^a`, fast-forward scanning.
    pub fn new(params: Params, seed: Word64) -> Result<Self, Error> {
        Ok(ExperimentConfig {
            params,
            seed,
            eps: DEFAULT_EPS,
            slab: SlabSpec::new(
                params.a().get(),
                DEFAULT_TARGET_POINTS,
                DEFAULT_FAST_SCAN_CAP,
            )?,
            mode: ScanMode::FastForward,
            control_points: DEFAULT_CONTROL_POINTS,
            control_seed: DEFAULT_CONTROL_SEED,
            census_steps: DEFAULT_CENSUS_STEPS,
            n_bits: 3,
            grid: Grid::default(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaneHits {
    pub plane: String,
    pub m: u64,
    pub sign_x: planes::Sign,
    pub sign_y: planes::Sign,
    pub hits: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseFrequencies {
    pub generator: CaseCensus,
    pub uniform: CaseCensus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitReport {
    pub params: Params,
    pub seed: String,
    pub magnify: f64,
    pub tolerance: f64,
    pub n_triples_scanned: u64,
    pub n_in_slab: u64,
    pub truncated: bool,
    pub hit_fraction: f64,
    pub per_plane_hits: Vec<PlaneHits>,
    pub control_points: u64,
    pub control_hit_fraction: f64,
    pub control_analytic: f64,
    pub control_sigma: f64,
    /// `hit_fraction / control_hit_fraction`; `null` if the control had no hits.
    pub concentration_ratio: Option<f64>,
    pub case_frequencies: CaseFrequencies,
    pub carry_leak_frequency: f64,
}

pub fn format_seed(seed: Word64) -> String {
    format!("0x{seed:016x}")
}

/// Runs sampling, hit statistics, the control baseline and the census.
pub fn run_experiment(config: &ExperimentConfig) -> Result<(HitReport, Vec<Point3>), Error> {
    let fam = family(config.params.a().get())?;
    let state = seed(config.seed, config.params);
    let sample = slab_sample(state, &config.slab, config.mode);
    let stats = hit_stats(&sample.points, &fam, config.eps, &config.slab)?;
    let control = control_baseline(config.control_points, &fam, config.eps, config.control_seed);
    let census = case_census(state, config.census_steps, config.n_bits)?;
    let uniform = case_census_uniform(
        config.control_seed,
        config.params.a(),
        config.census_steps,
        config.n_bits,
    )?;
    let concentration_ratio =
        (control.hit_fraction > 0.0).then(|| stats.hit_fraction / control.hit_fraction);
    let per_plane_hits = fam
        .iter()
        .zip(stats.per_plane_hits)
        .map(|(p, hits)| PlaneHits {
            plane: p.to_string(),
            m: p.m,
            sign_x: p.sign_x,
            sign_y: p.sign_y,
            hits,
        })
        .collect();
    let report = HitReport {
        params: config.params,
        seed: format_seed(config.seed),
        magnify: config.slab.magnify(),
        tolerance: config.eps,
        n_triples_scanned: sample.scanned,
        n_in_slab: sample.points.len() as u64,
        truncated: sample.truncated,
        hit_fraction: stats.hit_fraction,
        per_plane_hits,
        control_points: control.n_points,
        control_hit_fraction: control.hit_fraction,
        control_analytic: control.analytic,
        control_sigma: control.sigma,
        concentration_ratio,
        carry_leak_frequency: census.carry_leak_frequency,
        case_frequencies: CaseFrequencies {
            generator: census,
            uniform,
        },
    };
    Ok((report, sample.points))
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Point-cloud CSV: a `#` header, then `x_mag,y,z` per line.
pub fn points_csv(points: &[Point3], config: &ExperimentConfig) -> String {
    let mut out = format!(
        "# magnify={} params={} seed={}\n",
        1u64 << config.slab.magnify_exp(),
        config.params,
        format_seed(config.seed)
    );
    for p in points {
        let _ = writeln!(out, "{},{},{}", fmt_f(p.x), fmt_f(p.y), fmt_f(p.z));
    }
    out
}

/// Mesh CSV: strips of `x_mag,y,z` rows separated by blank lines.
pub fn mesh_csv(mesh: &planes::Mesh) -> String {
    let mut out = format!(
        "# plane m={} sign_x={} sign_y={} magnify={}\n",
        mesh.plane.m,
        mesh.plane.sign_x.as_char(),
        mesh.plane.sign_y.as_char(),
        mesh.magnify
    );
    for (i, strip) in mesh.strips.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for v in strip {
            let _ = writeln!(out, "{},{},{}", fmt_f(v[0]), fmt_f(v[1]), fmt_f(v[2]));
        }
    }
    out
}

/// Writes `bytes` to a sibling temp file, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(bytes).map_err(io)?;
        f.sync_all().map_err(io)?;
    }
    fs::rename(&tmp, path).map_err(io)
}

pub const POINTS_FILE: &str = "points.csv";
pub const REPORT_FILE: &str = "report.json";
pub const OVERLAY_FILE: &str = "overlay.manifest";

pub fn mesh_file_name(plane: &planes::Plane) -> String {
    format!("mesh_{}.csv", plane.tag())
}

pub fn report_json(report: &HitReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

/// Writes the point cloud, the eight plane meshes, the overlay manifest and
/// the JSON report into `dir`. Returns the written paths.
pub fn write_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    report: &HitReport,
    points: &[Point3],
) -> Result<Vec<PathBuf>, Error> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let fam = family(config.params.a().get())?;
    let mut written = Vec::new();

    let p = dir.join(POINTS_FILE);
    write_atomic(&p, points_csv(points, config).as_bytes())?;
    written.push(p);

    let mut manifest = format!(
        "# overlay: point cloud and plane meshes share the axes (x magnified by {})\npoints {}\n",
        1u64 << config.slab.magnify_exp(),
        POINTS_FILE
    );
    for plane in fam.iter() {
        let m = planes::mesh(
            plane,
            config.slab.x_max(),
            config.slab.magnify(),
            config.grid,
        )?;
        let name = mesh_file_name(plane);
        let p = dir.join(&name);
        write_atomic(&p, mesh_csv(&m).as_bytes())?;
        written.push(p);
        let _ = writeln!(manifest, "mesh {name} {plane}");
    }
    let _ = writeln!(manifest, "report {REPORT_FILE}");

    let p = dir.join(OVERLAY_FILE);
    write_atomic(&p, manifest.as_bytes())?;
    written.push(p);

    let p = dir.join(REPORT_FILE);
    write_atomic(&p, report_json(report).as_bytes())?;
    written.push(p);
    Ok(written)
}
