//! Octolinear sector assignment.

use std::f64::consts::FRAC_PI_4;

use crate::geometry::{wrapped_angle_diff, Point};
use crate::network::TransitNetwork;

/// Penalty for a sector whose opposite is already taken at the far station.
const FAR_END_CONFLICT: f64 = 100.0;
const MAX_PASSES: usize = 32;

pub fn sector_angle(k: u8) -> f64 {
    k as f64 * FRAC_PI_4
}

pub fn sector_dir(k: u8) -> Point {
    Point::from_angle(sector_angle(k))
}

pub fn nearest_sector(angle: f64) -> u8 {
    (angle / FRAC_PI_4).round().rem_euclid(8.0) as u8
}

pub fn rotation(angle: f64, k: u8) -> f64 {
    wrapped_angle_diff(angle, sector_angle(k))
}

/// Minimum-cost assignment of every row to a distinct column (rows ≤ columns).
/// Returns the column of each row.
pub fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    assert!(n <= m, "more rows than columns");
    // 1-based potentials; column 0 is the virtual start
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

/// Distinct sectors for edges leaving one station at `angles`, minimising the
/// total rotation.
pub fn station_sectors(angles: &[f64]) -> Vec<u8> {
    let cost: Vec<Vec<f64>> = angles
        .iter()
        .map(|&a| (0..8).map(|k| rotation(a, k)).collect())
        .collect();
    hungarian(&cost).into_iter().map(|k| k as u8).collect()
}

/// Sector of every octo connection, stored relative to its `from → to`
/// direction (the `to` end sees the opposite sector). Each edge starts at its
/// nearest sector; stations with duplicates are re-solved with an optimal
/// assignment until no station has two octo edges in one sector.
pub fn assign_octolinear_sectors(
    net: &TransitNetwork,
    pos: &[Point],
    octo: &[bool],
) -> Vec<Option<u8>> {
    let dir = |c: usize, s: usize| {
        let conn = &net.connections[c];
        (pos[conn.other(s)] - pos[s]).angle()
    };
    let mut sect: Vec<Option<u8>> = net
        .connections
        .iter()
        .enumerate()
        .map(|(c, conn)| octo[c].then(|| nearest_sector(dir(c, conn.from))))
        .collect();
    let at = |sect: &[Option<u8>], c: usize, s: usize| {
        sect[c].map(|k| {
            if net.connections[c].from == s {
                k
            } else {
                (k + 4) % 8
            }
        })
    };

    for _ in 0..MAX_PASSES {
        let mut changed = false;
        for s in 0..net.station_count() {
            let inc: Vec<usize> = net
                .neighbors(s)
                .iter()
                .map(|&(_, c)| c)
                .filter(|&c| octo[c])
                .collect();
            let mut used = [0u8; 8];
            for &c in &inc {
                used[at(&sect, c, s).unwrap() as usize] += 1;
            }
            if used.iter().all(|&u| u <= 1) {
                continue;
            }
            let cost: Vec<Vec<f64>> = inc
                .iter()
                .map(|&c| {
                    let far = net.connections[c].other(s);
                    (0..8u8)
                        .map(|k| {
                            let opposite = (k + 4) % 8;
                            let blocked = net.neighbors(far).iter().any(|&(_, c2)| {
                                c2 != c && octo[c2] && at(&sect, c2, far) == Some(opposite)
                            });
                            rotation(dir(c, s), k) + if blocked { FAR_END_CONFLICT } else { 0.0 }
                        })
                        .collect()
                })
                .collect();
            for (&c, k) in inc.iter().zip(hungarian(&cost)) {
                let k = k as u8;
                let rel = if net.connections[c].from == s {
                    k
                } else {
                    (k + 4) % 8
                };
                if sect[c] != Some(rel) {
                    sect[c] = Some(rel);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    sect
}

/// True when no station has two octo edges in the same sector.
pub fn sectors_valid(net: &TransitNetwork, sect: &[Option<u8>]) -> bool {
    (0..net.station_count()).all(|s| {
        let mut used = [false; 8];
        net.neighbors(s).iter().all(|&(_, c)| match sect[c] {
            None => true,
            Some(k) => {
                let k = if net.connections[c].from == s {
                    k
                } else {
                    (k + 4) % 8
                } as usize;
                !std::mem::replace(&mut used[k], true)
            }
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::testnet::simple;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn total(angles: &[f64], ks: &[u8]) -> f64 {
        angles.iter().zip(ks).map(|(&a, &k)| rotation(a, k)).sum()
    }

    /// Every injective map of the edges into the eight sectors.
    fn brute_force(angles: &[f64]) -> f64 {
        fn rec(angles: &[f64], used: &mut [bool; 8], acc: f64, best: &mut f64) {
            let Some((&a, rest)) = angles.split_first() else {
                *best = best.min(acc);
                return;
            };
            for k in 0..8u8 {
                if !used[k as usize] {
                    used[k as usize] = true;
                    rec(rest, used, acc + rotation(a, k), best);
                    used[k as usize] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(angles, &mut [false; 8], 0.0, &mut best);
        best
    }

    #[test]
    fn distinct_nearest_sectors_kept() {
        let ks = station_sectors(&[0.1, 1.6, 3.0]);
        assert_eq!(ks, vec![0, 2, 4]);
    }

    #[test]
    fn two_edges_near_east() {
        let angles = [0.05, -0.1];
        let ks = station_sectors(&angles);
        // the edge closer to east keeps it; the other moves to south-east
        assert_eq!(ks, vec![0, 7]);
        assert_eq!(total(&angles, &ks), brute_force(&angles));
    }

    #[test]
    fn degree_eight_is_a_bijection() {
        let angles: Vec<f64> = (0..8).map(|k| 0.3 * k as f64).collect();
        let mut ks = station_sectors(&angles);
        ks.sort_unstable();
        assert_eq!(ks, (0..8).collect::<Vec<u8>>());
    }

    #[test]
    fn hungarian_matches_brute_force() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..300 {
            let d = rng.gen_range(1..=6);
            let angles: Vec<f64> = (0..d).map(|_| rng.gen_range(-PI..PI)).collect();
            let ks = station_sectors(&angles);
            let mut seen = [false; 8];
            assert!(ks
                .iter()
                .all(|&k| !std::mem::replace(&mut seen[k as usize], true)));
            assert_eq!(total(&angles, &ks), brute_force(&angles), "{angles:?}");
        }
    }

    #[test]
    fn network_assignment_resolves_conflicts() {
        // two edges leaving the hub at 10° and -10°
        let net = simple(
            &[(0.0, 0.0), (1.0, 0.176), (1.0, -0.176), (-1.0, 0.0)],
            &[(0, 1), (0, 2), (3, 0)],
        );
        let octo = vec![true; 3];
        let sect = assign_octolinear_sectors(&net, &net.positions(), &octo);
        assert!(sectors_valid(&net, &sect));
        assert_eq!(sect[2], Some(0));
        let mut pair = [sect[0].unwrap(), sect[1].unwrap()];
        pair.sort_unstable();
        assert!(pair == [0, 1] || pair == [0, 7], "{pair:?}");
    }
}
