//! Statistical checks against binomial bands and independently recomputed
//! counts. All randomness is seeded, so these are deterministic.

use xsplanes::control::ControlGen;
use xsplanes::engine::{mini, next_word, seed, Params};
use xsplanes::experiment::{case_census, case_census_uniform, slab_sample, ScanMode, SlabSpec};
use xsplanes::planes::{family, min_dist};

fn binomial_sigma(p: f64, n: f64) -> f64 {
    (p * (1.0 - p) / n).sqrt()
}

fn default_params() -> Params {
    Params::new(23, 17, 26).unwrap()
}

#[test]
fn xorshift_slab_acceptance_rate() {
    let k = 8;
    let spec = SlabSpec::new(k, 4000, 1 << 24).unwrap();
    let s = slab_sample(seed(11, default_params()), &spec, ScanMode::Full);
    assert!(!s.truncated);
    let p = 2f64.powi(-(k as i32));
    let rate = s.points.len() as f64 / s.scanned as f64;
    assert!(
        (rate - p).abs() <= 6.0 * binomial_sigma(p, s.scanned as f64),
        "{rate}"
    );
    for q in &s.points {
        assert!((0.0..1.0).contains(&q.x));
    }
}

#[test]
fn control_slab_acceptance_rate() {
    let n = 1_000_000;
    let p = 2f64.powi(-8);
    let mut g = ControlGen::new(3, 0);
    let hits = (0..n).filter(|_| g.next_unit() < p).count();
    let rate = hits as f64 / n as f64;
    assert!(
        (rate - p).abs() <= 4.0 * binomial_sigma(p, n as f64),
        "{rate}"
    );
}

#[test]
fn uniform_points_hit_planes_at_most_sixteen_eps() {
    let eps = 1.0 / 1024.0;
    for a in [3, 23] {
        let fam = family(a).unwrap();
        let n = 200_000;
        let mut g = ControlGen::new(99, a as u64);
        let hits = (0..n)
            .filter(|_| min_dist(&g.next_point(), &fam).0 <= eps)
            .count();
        let f = hits as f64 / n as f64;
        let bound = 16.0 * eps + 4.0 * binomial_sigma(16.0 * eps, n as f64);
        assert!(f <= bound, "a={a}: {f} > {bound}");
    }
}

/// Top `n` bits of `x` and `y`: `(in_A, in_B, in_C)` from the columnwise
/// conditions.
fn oracle_label(x: u64, y: u64, n: u32) -> [bool; 3] {
    let (x, y) = (x >> (64 - n), y >> (64 - n));
    [x & y == 0, !x & y == 0, x & !y == 0]
}

#[test]
fn census_grid_matches_recount() {
    let params = default_params();
    let a = params.a().get();
    let n_bits = 3;
    let steps = 50_000;
    let st = seed(0xabc, params);
    let census = case_census(st, steps, n_bits).unwrap();

    let mut grid = [[0u64; 3]; 3];
    let (mut s0, mut s1) = st.words();
    for _ in 0..steps {
        let s2 = next_word(s0, s1, &params);
        let t0 = s0 ^ (s0 << a);
        let t1 = s1 ^ (s1 << a);
        let i0 = oracle_label(s0, s0 << a, n_bits);
        let i1 = oracle_label(s1, s1 << a, n_bits);
        let o0 = oracle_label(s1, t0, n_bits);
        let o1 = oracle_label(s2, t1, n_bits);
        for o in 0..3 {
            for k in 0..3 {
                grid[o][k] += (o0[o] && o1[o] && i0[k] && i1[k]) as u64;
            }
        }
        s0 = s1;
        s1 = s2;
    }
    assert_eq!(census.grid_counts, grid);
    assert_eq!(census.n_steps, steps);
}

#[test]
fn uniform_label_frequencies() {
    let n = 1_000_000u64;
    let c = case_census_uniform(5, default_params().a(), n, 3).unwrap();
    let p = 27.0 / 64.0;
    let tol = 4.0 * binomial_sigma(p, n as f64);
    for f in c
        .inner_label_frequencies
        .into_iter()
        .chain(c.outer_label_frequencies)
    {
        assert!((f - p).abs() <= tol, "{f} vs {p}");
    }
}

#[test]
fn generator_label_frequencies_are_close_to_uniform() {
    let n = 1_000_000u64;
    let c = case_census(seed(1, default_params()), n, 3).unwrap();
    let p = 27.0 / 64.0;
    let tol = 4.0 * binomial_sigma(p, n as f64);
    for f in c
        .inner_label_frequencies
        .into_iter()
        .chain(c.outer_label_frequencies)
    {
        assert!((f - p).abs() <= tol, "{f} vs {p}");
    }
}

#[test]
fn mini_generator_is_bijective_for_several_parameters() {
    for (a, b, c) in [(23, 17, 26), (1, 1, 1), (3, 5, 7), (7, 1, 2), (2, 6, 4)] {
        let p = mini::MiniParams::reduced(a, b, c).unwrap();
        let map = mini::state_map(p);
        let mut sorted = map.clone();
        sorted.sort_unstable();
        assert!(
            sorted.iter().enumerate().all(|(i, &v)| v as usize == i),
            "{a},{b},{c}"
        );
        // F2-linear: image of xor is xor of images.
        for u in (0..1usize << 16).step_by(257) {
            for v in (0..1usize << 16).step_by(4099) {
                assert_eq!(map[u ^ v], map[u] ^ map[v]);
            }
        }
    }
}
