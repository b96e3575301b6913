//! Classical MaxCut: exhaustive enumeration for small graphs, multi-restart
//! single-flip local search otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cut_value, InteractionGraph, SignString};
use crate::error::{Error, Result};

pub const DEFAULT_EXHAUSTIVE_LIMIT: usize = 26;

/// Masks per enumeration chunk; fixed so the result never depends on the pool.
const CHUNK_BITS: u32 = 16;

/// How [`choose_signs`] picks a sign string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPolicy {
    Exact,
    LocalSearch { restarts: usize },
    Random,
}

pub fn max_cut_exact(g: &InteractionGraph) -> Result<(SignString, f64)> {
    max_cut_exact_with_limit(g, DEFAULT_EXHAUSTIVE_LIMIT)
}

/// Exhaustive MaxCut with `s_0 = +1` fixed. Ties resolve to the
/// lexicographically smallest string, `+1` ordered before `-1`.
pub fn max_cut_exact_with_limit(g: &InteractionGraph, limit: usize) -> Result<(SignString, f64)> {
    let n = g.n_vertices();
    if n > limit || n > 63 {
        return Err(Error::SizeLimit {
            what: "exhaustive MaxCut vertex count",
            size: n,
            limit: limit.min(63),
        });
    }
    if n <= 1 {
        return Ok((SignString::all_plus(n), 0.0));
    }
    // Mask bit (n-1-v) stands for vertex v (v ≥ 1), so increasing masks walk
    // the strings in lexicographic order. Vertex 0 stays at +1.
    let free = n - 1;
    let bit_of = |v: usize| free - v;
    let total: u64 = 1 << free;
    let chunk = 1u64 << CHUNK_BITS.min(free as u32);
    let n_chunks = total / chunk;

    let best = (0..n_chunks)
        .into_par_iter()
        .map(|c| best_in_chunk(g, c * chunk, chunk, &bit_of))
        .collect::<Vec<_>>()
        .into_iter()
        .fold(
            (f64::NEG_INFINITY, 0u64),
            |acc, cand| {
                if cand.0 > acc.0 {
                    cand
                } else {
                    acc
                }
            },
        );

    let mut signs = vec![1i8; n];
    for (v, s) in signs.iter_mut().enumerate().skip(1) {
        if best.1 >> bit_of(v) & 1 == 1 {
            *s = -1;
        }
    }
    let s = SignString::new(signs)?;
    let value = cut_value(g, &s)?;
    Ok((s, value))
}

// Walks one chunk in increasing mask order, updating the cut incrementally
// along the binary count: each increment flips a suffix of low bits.
fn best_in_chunk(g: &InteractionGraph, start: u64, len: u64, bit_of: &dyn Fn(usize) -> usize) -> (f64, u64) {
    let n = g.n_vertices();
    let mut vertex_of_bit = vec![0usize; n];
    for v in 1..n {
        vertex_of_bit[bit_of(v)] = v;
    }
    let mut signs: Vec<i8> = (0..n)
        .map(|v| if v > 0 && start >> bit_of(v) & 1 == 1 { -1 } else { 1 })
        .collect();
    let mut cut: f64 = g
        .edges()
        .iter()
        .filter(|e| signs[e.u] != signs[e.v])
        .map(|e| e.weight)
        .sum();
    let mut best = (cut, start);
    for mask in start + 1..start + len {
        let changed = mask ^ (mask - 1);
        let mut bits = changed;
        while bits != 0 {
            let b = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            let v = vertex_of_bit[b];
            cut += flip_gain(g, &signs, v);
            signs[v] = -signs[v];
        }
        if cut > best.0 {
            best = (cut, mask);
        }
    }
    // Recompute to shed incremental rounding before comparing across chunks.
    let s: Vec<i8> = (0..n)
        .map(|v| if v > 0 && best.1 >> bit_of(v) & 1 == 1 { -1 } else { 1 })
        .collect();
    let exact = g.edges().iter().filter(|e| s[e.u] != s[e.v]).map(|e| e.weight).sum();
    (exact, best.1)
}

/// Change in cut weight from flipping vertex `v`.
fn flip_gain(g: &InteractionGraph, signs: &[i8], v: usize) -> f64 {
    g.neighbors(v)
        .iter()
        .map(|&(w, e)| {
            let weight = g.edges()[e].weight;
            if signs[w] == signs[v] {
                weight
            } else {
                -weight
            }
        })
        .sum()
}

/// Best steepest-ascent single-flip local optimum over `restarts` random
/// starts. Restart `r` draws from its own ChaCha stream, so the result is
/// independent of scheduling.
pub fn max_cut_local_search(g: &InteractionGraph, seed: u64, restarts: usize) -> Result<(SignString, f64)> {
    if restarts == 0 {
        return Err(Error::InvalidInput("local search needs at least one restart".into()));
    }
    let n = g.n_vertices();
    let results: Vec<(f64, Vec<i8>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut signs: Vec<i8> = (0..n).map(|_| if rng.gen() { 1 } else { -1 }).collect();
            climb(g, &mut signs);
            let cut = g
                .edges()
                .iter()
                .filter(|e| signs[e.u] != signs[e.v])
                .map(|e| e.weight)
                .sum();
            (cut, signs)
        })
        .collect();
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.0 > results[best].0 {
            best = i;
        }
    }
    let (cut, signs) = results.into_iter().nth(best).expect("restarts ≥ 1");
    Ok((SignString::new(signs)?.canonical(), cut))
}

fn climb(g: &InteractionGraph, signs: &mut [i8]) {
    const EPS: f64 = 1e-12;
    loop {
        let mut best_v = None;
        let mut best_gain = EPS;
        for v in 0..signs.len() {
            let gain = flip_gain(g, signs, v);
            if gain > best_gain {
                best_gain = gain;
                best_v = Some(v);
            }
        }
        match best_v {
            Some(v) => signs[v] = -signs[v],
            None => return,
        }
    }
}

pub fn choose_signs(g: &InteractionGraph, policy: SignPolicy, seed: u64) -> Result<SignString> {
    match policy {
        SignPolicy::Exact => Ok(max_cut_exact(g)?.0),
        SignPolicy::LocalSearch { restarts } => Ok(max_cut_local_search(g, seed, restarts)?.0),
        SignPolicy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(SignString::random(g.n_vertices(), &mut rng))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::Edge;

    fn brute_force(g: &InteractionGraph) -> f64 {
        let n = g.n_vertices();
        (0..1u64 << n)
            .map(|m| cut_value(g, &SignString::from_mask(n, m)).unwrap())
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn exact_small_cases() {
        let edge = InteractionGraph::new(2, [(0, 1)]).unwrap();
        assert_eq!(max_cut_exact(&edge).unwrap().1, 1.0);
        assert_eq!(max_cut_exact(&InteractionGraph::complete(4).unwrap()).unwrap().1, 4.0);
        assert_eq!(max_cut_exact(&InteractionGraph::ring(5).unwrap()).unwrap().1, 4.0);
        assert_eq!(brute_force(&InteractionGraph::ring(5).unwrap()), 4.0);
    }

    #[test]
    fn exact_tie_break_is_lexicographic() {
        let (s, cut) = max_cut_exact(&InteractionGraph::ring(6).unwrap()).unwrap();
        assert_eq!(cut, 6.0);
        assert_eq!(s, SignString::alternating(6));
        // K4: the smallest balanced split with s_0 = + is (+,+,-,-)
        let (s, _) = max_cut_exact(&InteractionGraph::complete(4).unwrap()).unwrap();
        assert_eq!(s.as_slice(), &[1, 1, -1, -1]);
    }

    #[test]
    fn exact_matches_brute_force_across_chunks() {
        // 18 vertices forces more than one enumeration chunk
        let g = InteractionGraph::erdos_renyi(18, 0.3, 4).unwrap();
        let (s, cut) = max_cut_exact(&g).unwrap();
        assert_eq!(cut, cut_value(&g, &s).unwrap());
        let g = InteractionGraph::erdos_renyi(11, 0.5, 9).unwrap();
        assert_eq!(max_cut_exact(&g).unwrap().1, brute_force(&g));
    }

    #[test]
    fn exact_handles_weights() {
        let g = InteractionGraph::from_edges(
            3,
            vec![
                Edge::weighted(0, 1, 2.0),
                Edge::weighted(1, 2, 2.0),
                Edge::weighted(0, 2, 5.0),
            ],
        )
        .unwrap();
        assert_eq!(max_cut_exact(&g).unwrap().1, 7.0);
    }

    #[test]
    fn exact_respects_limit() {
        let g = InteractionGraph::ring(12).unwrap();
        assert!(matches!(max_cut_exact_with_limit(&g, 10), Err(Error::SizeLimit { .. })));
    }

    #[test]
    fn local_search_fixtures() {
        let ring8 = InteractionGraph::ring(8).unwrap();
        assert_eq!(max_cut_local_search(&ring8, 1, 4).unwrap().1, 8.0);
        let k4 = InteractionGraph::complete(4).unwrap();
        assert_eq!(max_cut_local_search(&k4, 0, 4).unwrap().1, 4.0);
        let empty = InteractionGraph::new(5, []).unwrap();
        assert_eq!(max_cut_local_search(&empty, 0, 2).unwrap().1, 0.0);
        assert!(max_cut_local_search(&k4, 0, 0).is_err());
    }

    #[test]
    fn local_search_is_deterministic() {
        let g = InteractionGraph::erdos_renyi(20, 0.4, 2).unwrap();
        assert_eq!(
            max_cut_local_search(&g, 17, 8).unwrap(),
            max_cut_local_search(&g, 17, 8).unwrap()
        );
    }

    #[test]
    fn choose_signs_dispatch() {
        let ring6 = InteractionGraph::ring(6).unwrap();
        assert_eq!(
            choose_signs(&ring6, SignPolicy::Exact, 0).unwrap(),
            SignString::alternating(6)
        );
        let k6 = InteractionGraph::complete(6).unwrap();
        let a = choose_signs(&k6, SignPolicy::Random, 1).unwrap();
        assert_eq!(a, choose_signs(&k6, SignPolicy::Random, 1).unwrap());
        assert_eq!(a.len(), 6);
    }
}
