use super::EncodingError;
use serde::{Deserialize, Serialize};

/// Rectangular Fermi-Hubbard lattice with open boundaries. `ny = 1` is a chain.
///
/// Modes are numbered `spin * N + site` with `site = y * nx + x` and spin 0 = up.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub nx: usize,
    pub ny: usize,
    pub spinful: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HopDirection {
    Horizontal,
    Vertical,
}

/// A nearest-neighbour hopping term between modes `j < k` of equal spin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HopPair {
    pub j: usize,
    pub k: usize,
    pub direction: HopDirection,
    /// Parity of the column (horizontal) or row (vertical) of the lower site.
    pub parity: usize,
    pub spin: usize,
}

impl LatticeSpec {
    pub fn new(nx: usize, ny: usize, spinful: bool) -> Result<Self, EncodingError> {
        if nx == 0 || ny == 0 {
            return Err(EncodingError::Lattice(format!("sizes must be positive, got {nx}x{ny}")));
        }
        Ok(LatticeSpec { nx, ny, spinful })
    }

    /// Spinful chain of `n` sites.
    pub fn chain(n: usize) -> Self {
        LatticeSpec { nx: n, ny: 1, spinful: true }
    }

    pub fn n_sites(&self) -> usize {
        self.nx * self.ny
    }

    pub fn n_spins(&self) -> usize {
        if self.spinful {
            2
        } else {
            1
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_sites() * self.n_spins()
    }

    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }

    pub fn mode(&self, site: usize, spin: usize) -> usize {
        spin * self.n_sites() + site
    }

    pub fn site_of(&self, mode: usize) -> usize {
        mode % self.n_sites()
    }

    pub fn spin_of(&self, mode: usize) -> usize {
        mode / self.n_sites()
    }

    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.nx, site / self.nx)
    }

    pub fn site(&self, x: usize, y: usize) -> usize {
        y * self.nx + x
    }

    /// Boustrophedon order of the sites: rows alternate direction.
    pub fn snake_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_sites());
        for y in 0..self.ny {
            for i in 0..self.nx {
                let x = if y % 2 == 0 { i } else { self.nx - 1 - i };
                out.push(self.site(x, y));
            }
        }
        out
    }

    /// Hopping terms in Trotter order: horizontal even, horizontal odd,
    /// vertical even, vertical odd; spin up before spin down within each group.
    pub fn hopping_pairs(&self) -> Vec<HopPair> {
        let mut out = Vec::new();
        for (dir, parity) in [
            (HopDirection::Horizontal, 0),
            (HopDirection::Horizontal, 1),
            (HopDirection::Vertical, 0),
            (HopDirection::Vertical, 1),
        ] {
            for spin in 0..self.n_spins() {
                for y in 0..self.ny {
                    for x in 0..self.nx {
                        let (nb, par) = match dir {
                            HopDirection::Horizontal if x + 1 < self.nx => (self.site(x + 1, y), x % 2),
                            HopDirection::Vertical if y + 1 < self.ny => (self.site(x, y + 1), y % 2),
                            _ => continue,
                        };
                        if par != parity {
                            continue;
                        }
                        out.push(HopPair {
                            j: self.mode(self.site(x, y), spin),
                            k: self.mode(nb, spin),
                            direction: dir,
                            parity,
                            spin,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn are_hopping_neighbors(&self, a: usize, b: usize) -> bool {
        if a >= self.n_modes() || b >= self.n_modes() || self.spin_of(a) != self.spin_of(b) {
            return false;
        }
        let (xa, ya) = self.coords(self.site_of(a));
        let (xb, yb) = self.coords(self.site_of(b));
        xa.abs_diff(xb) + ya.abs_diff(yb) == 1
    }
}
