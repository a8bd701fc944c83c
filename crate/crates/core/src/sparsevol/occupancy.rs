/// One bit per voxel; bit `x + n * (y + n * z)`, eight per byte, least
/// significant bit first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Occupancy {
    pub grid_n: usize,
    pub bytes: Vec<u8>,
}

impl Occupancy {
    pub fn empty(grid_n: usize) -> Self {
        Occupancy {
            grid_n,
            bytes: vec![0; (grid_n * grid_n * grid_n).div_ceil(8)],
        }
    }

    /// Wraps raw bytes, checking the length against the grid.
    pub fn from_bytes(grid_n: usize, bytes: Vec<u8>) -> Option<Self> {
        (bytes.len() == (grid_n * grid_n * grid_n).div_ceil(8)).then_some(Occupancy { grid_n, bytes })
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.grid_n * (y + self.grid_n * z)
    }

    #[inline]
    pub fn get_index(&self, i: usize) -> bool {
        self.bytes[i >> 3] & (1 << (i & 7)) != 0
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.get_index(self.index(x, y, z))
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, on: bool) {
        let i = self.index(x, y, z);
        if on {
            self.bytes[i >> 3] |= 1 << (i & 7);
        } else {
            self.bytes[i >> 3] &= !(1 << (i & 7));
        }
    }

    pub fn count(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    /// Linear indices of set bits in increasing order.
    pub fn iter_set(&self) -> impl Iterator<Item = usize> + '_ {
        let total = self.grid_n * self.grid_n * self.grid_n;
        self.bytes
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0)
            .flat_map(move |(byte, &b)| {
                (0..8)
                    .filter(move |bit| b & (1 << bit) != 0)
                    .map(move |bit| byte * 8 + bit)
                    .filter(move |&i| i < total)
            })
    }

    pub fn coords(&self, i: usize) -> [usize; 3] {
        let n = self.grid_n;
        [i % n, (i / n) % n, i / (n * n)]
    }

    /// Fraction of voxels set.
    pub fn fraction(&self) -> f64 {
        self.count() as f64 / (self.grid_n * self.grid_n * self.grid_n) as f64
    }
}
