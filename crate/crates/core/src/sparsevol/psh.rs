//! Perfect spatial hashing of block coordinates.
//!
//! `h(p) = ((p mod m) + (offsets[p mod r] mod r)) mod m`, componentwise,
//! with an `m^3` slot table and an `r^3` offset table.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Seed of the offset search order.
pub const PSH_SEED: u64 = 0x5eed_0f_0ff5e7;

#[derive(Debug, Error, PartialEq)]
pub enum PshError {
    #[error("no block coordinates to hash")]
    Empty,
    #[error("block coordinate {coord:?} lies outside a {domain}^3 domain")]
    OutOfDomain { coord: [u32; 3], domain: usize },
    #[error("duplicate block coordinate {0:?}")]
    Duplicate([u32; 3]),
    #[error(
        "no perfect hash for {blocks} blocks: tried table sizes {min_table}..={max_table} with every coprime offset-table size up to the table size"
    )]
    Unbuildable {
        blocks: usize,
        min_table: usize,
        max_table: usize,
    },
    #[error("offset table is {got} entries, expected {expected}")]
    OffsetTableSize { got: usize, expected: usize },
    #[error("blocks {a:?} and {b:?} hash to the same slot {slot}")]
    Collision { a: [u32; 3], b: [u32; 3], slot: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PshTable {
    pub m_bar: usize,
    pub r_bar: usize,
    /// Entry `x + r * (y + r * z)`.
    pub offsets: Vec<[u8; 3]>,
    /// Slot `x + m * (y + m * z)` holds a block index or nothing.
    pub slots: Vec<Option<u32>>,
    /// Offset-table size the construction started from.
    pub initial_r_bar: usize,
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Smallest `m` with `m^3 >= n`.
fn cube_root_ceil(n: usize) -> usize {
    let mut m = (n as f64).cbrt().floor() as usize;
    while m * m * m < n {
        m += 1;
    }
    while m > 1 && (m - 1).pow(3) >= n {
        m -= 1;
    }
    m.max(1)
}

/// Starting offset-table edge: `max(2, ceil((n / 6)^(1/3)))`, or 1 for a
/// single-slot table.
fn initial_r_bar(n: usize, m_bar: usize) -> usize {
    if m_bar == 1 {
        return 1;
    }
    let mut r = (n as f64 / 6.0).cbrt().ceil() as usize;
    while r > 1 && (r - 1).pow(3) * 6 >= n {
        r -= 1;
    }
    while r.pow(3) * 6 < n {
        r += 1;
    }
    r.max(2)
}

#[inline]
fn slot_of(p: [u32; 3], m: usize, r: usize, offsets: &[[u8; 3]]) -> usize {
    let e = offsets[entry_of(p, r)];
    let h: [usize; 3] = std::array::from_fn(|a| (p[a] as usize % m + e[a] as usize % r) % m);
    h[0] + m * (h[1] + m * h[2])
}

#[inline]
fn entry_of(p: [u32; 3], r: usize) -> usize {
    let q = p.map(|c| c as usize % r);
    q[0] + r * (q[1] + r * q[2])
}

impl PshTable {
    pub fn slot_count(&self) -> usize {
        self.m_bar.pow(3)
    }

    /// Slot coordinates of a slot index.
    pub fn slot_coords(&self, slot: usize) -> [usize; 3] {
        let m = self.m_bar;
        [slot % m, (slot / m) % m, slot / (m * m)]
    }

    /// Checks that the given coordinates land in pairwise distinct slots.
    pub fn verify(&self, coords: &[[u32; 3]]) -> Result<(), PshError> {
        let expected = self.r_bar.pow(3);
        if self.offsets.len() != expected {
            return Err(PshError::OffsetTableSize {
                got: self.offsets.len(),
                expected,
            });
        }
        let mut owner: Vec<Option<[u32; 3]>> = vec![None; self.slot_count()];
        for &p in coords {
            let slot = psh_lookup(self, p);
            if let Some(a) = owner[slot] {
                return Err(PshError::Collision { a, b: p, slot });
            }
            owner[slot] = Some(p);
        }
        Ok(())
    }
}

/// Slot index of a block coordinate. Meaningful only for coordinates the
/// table was built over.
#[inline]
pub fn psh_lookup(table: &PshTable, coord: [u32; 3]) -> usize {
    slot_of(coord, table.m_bar, table.r_bar, &table.offsets)
}

/// One construction attempt at fixed table sizes.
fn try_build(coords: &[[u32; 3]], m: usize, r: usize, rng: &mut ChaCha8Rng) -> Option<(Vec<[u8; 3]>, Vec<Option<u32>>)> {
    let entries = r * r * r;
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); entries];
    for (i, &p) in coords.iter().enumerate() {
        buckets[entry_of(p, r)].push(i as u32);
    }
    let mut order: Vec<usize> = (0..entries).filter(|&e| !buckets[e].is_empty()).collect();
    order.sort_by_key(|&e| (std::cmp::Reverse(buckets[e].len()), e));

    let mut candidates: Vec<[u8; 3]> = (0..entries)
        .map(|k| [k % r, (k / r) % r, k / (r * r)].map(|c| c as u8))
        .collect();
    candidates.shuffle(rng);

    let mut offsets = vec![[0u8; 3]; entries];
    let mut slots: Vec<Option<u32>> = vec![None; m * m * m];
    let mut base = Vec::new();
    for e in order {
        base.clear();
        base.extend(buckets[e].iter().map(|&i| coords[i as usize].map(|c| c as usize % m)));
        let start = rng.random_range(0..entries);
        let fits = |o: [u8; 3], slots: &[Option<u32>]| {
            base.iter().all(|b| {
                let h: [usize; 3] = std::array::from_fn(|a| (b[a] + o[a] as usize) % m);
                slots[h[0] + m * (h[1] + m * h[2])].is_none()
            })
        };
        let chosen = (0..entries)
            .map(|k| candidates[(start + k) % entries])
            .find(|&o| fits(o, &slots))?;
        offsets[e] = chosen;
        for (&i, b) in buckets[e].iter().zip(&base) {
            let h: [usize; 3] = std::array::from_fn(|a| (b[a] + chosen[a] as usize) % m);
            let slot = &mut slots[h[0] + m * (h[1] + m * h[2])];
            if slot.is_some() {
                // Two points of one bucket share a residue mod m.
                return None;
            }
            *slot = Some(i);
        }
    }
    Some((offsets, slots))
}

/// Builds a collision-free hash over distinct block coordinates inside a
/// `domain_blocks^3` domain. Slot values are indices into `coords`.
///
/// The slot table starts at the smallest cube holding every block. When no
/// offset assignment is found, the offset table grows while it stays no
/// larger than the slot table, and after that the slot table grows while
/// it holds at most `max(8 * N, 64)` slots.
pub fn psh_build(coords: &[[u32; 3]], domain_blocks: usize) -> Result<PshTable, PshError> {
    let n = coords.len();
    if n == 0 {
        return Err(PshError::Empty);
    }
    let mut seen = std::collections::HashSet::with_capacity(n);
    for &p in coords {
        if p.iter().any(|&c| c as usize >= domain_blocks) {
            return Err(PshError::OutOfDomain {
                coord: p,
                domain: domain_blocks,
            });
        }
        if !seen.insert(p) {
            return Err(PshError::Duplicate(p));
        }
    }
    let m_min = cube_root_ceil(n);
    let slot_budget = (8 * n).max(64);
    let mut m = m_min;
    let mut rng = ChaCha8Rng::seed_from_u64(PSH_SEED);
    while m.pow(3) <= slot_budget || m == m_min {
        let start = initial_r_bar(n, m);
        let mut r = start;
        while r <= m {
            if gcd(r, m) == 1 {
                if let Some((offsets, slots)) = try_build(coords, m, r, &mut rng) {
                    return Ok(PshTable {
                        m_bar: m,
                        r_bar: r,
                        offsets,
                        slots,
                        initial_r_bar: start,
                    });
                }
            }
            r += 1;
        }
        m += 1;
    }
    Err(PshError::Unbuildable {
        blocks: n,
        min_table: m_min,
        max_table: m - 1,
    })
}
