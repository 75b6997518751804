use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Identifies an independent random stream: a master seed plus a path index.
///
/// Each simulator derives its generators from the pair alone, so a path does not depend on
/// which worker produced it or in what order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamSeed {
    pub master: u64,
    pub index: u64,
}

impl StreamSeed {
    pub fn new(master: u64, index: u64) -> Self {
        Self { master, index }
    }

    /// Generator for one leg of the path (variance, price, noise, ...).
    pub(crate) fn leg(&self, leg: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(self.index.wrapping_mul(8).wrapping_add(leg));
        rng
    }
}

impl From<u64> for StreamSeed {
    fn from(master: u64) -> Self {
        Self { master, index: 0 }
    }
}

pub(crate) const LEG_VARIANCE: u64 = 0;
pub(crate) const LEG_PRICE: u64 = 1;
pub(crate) const LEG_NOISE: u64 = 2;
