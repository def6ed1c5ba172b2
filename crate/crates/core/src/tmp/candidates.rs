use rayon::prelude::*;

use crate::field::Offset;
use crate::scalar::Scalar;

/// Where a candidate offset came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Object-motion scatter, un-jittered or jittered.
    Obj,
    /// Jittered camera-motion candidate.
    Cam,
    /// Un-jittered previous offset kept in place.
    Inherited,
    /// Best offset of a neighboring pixel from the previous sweep.
    Neighbor,
    /// Uniform draw of a cold start.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate<T> {
    pub offset: Offset<T>,
    pub provenance: Provenance,
}

impl<T: Scalar> Candidate<T> {
    pub fn new(offset: Offset<T>, provenance: Provenance) -> Self {
        Self { offset, provenance }
    }
}

/// Bounded per-pixel candidate sets.
///
/// Offsets are deduplicated on insertion by exact equality; once a pixel
/// holds `capacity` candidates further arrivals are dropped.
#[derive(Clone, Debug)]
pub struct CandidateBuffer<T> {
    width: usize,
    height: usize,
    capacity: usize,
    slots: Vec<Candidate<T>>,
    lens: Vec<u32>,
    dropped: u64,
}

/// Inserts into a fixed-capacity slot slice. Returns `false` on duplicate or saturation.
#[inline]
pub(crate) fn push_dedup<T: Scalar>(
    slots: &mut [Candidate<T>],
    len: &mut u32,
    cand: Candidate<T>,
) -> PushOutcome {
    let n = *len as usize;
    if slots[..n].iter().any(|c| c.offset == cand.offset) {
        return PushOutcome::Duplicate;
    }
    if n == slots.len() {
        return PushOutcome::Full;
    }
    slots[n] = cand;
    *len += 1;
    PushOutcome::Added
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PushOutcome {
    Added,
    Duplicate,
    Full,
}

impl<T: Scalar> CandidateBuffer<T> {
    pub fn new(width: usize, height: usize, capacity: usize) -> Self {
        let filler = Candidate::new(Offset::zero(), Provenance::Random);
        Self {
            width,
            height,
            capacity,
            slots: vec![filler; width * height * capacity],
            lens: vec![0; width * height],
            dropped: 0,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Candidates of pixel `(x, y)` in insertion order.
    #[inline]
    pub fn at(&self, x: usize, y: usize) -> &[Candidate<T>] {
        self.at_index(y * self.width + x)
    }

    #[inline]
    pub fn at_index(&self, i: usize) -> &[Candidate<T>] {
        let start = i * self.capacity;
        &self.slots[start..start + self.lens[i] as usize]
    }

    #[inline]
    pub fn len_at(&self, x: usize, y: usize) -> usize {
        self.lens[y * self.width + x] as usize
    }

    /// Total candidates over all pixels.
    pub fn total(&self) -> usize {
        self.lens.iter().map(|&n| n as usize).sum()
    }

    /// Arrivals rejected because a pixel was already at capacity.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// Returns `true` if the candidate was stored.
    pub fn push(&mut self, x: usize, y: usize, cand: Candidate<T>) -> bool {
        let i = y * self.width + x;
        let start = i * self.capacity;
        match push_dedup(&mut self.slots[start..start + self.capacity], &mut self.lens[i], cand) {
            PushOutcome::Added => true,
            PushOutcome::Duplicate => false,
            PushOutcome::Full => {
                self.dropped += 1;
                false
            }
        }
    }

    /// Appends `other`'s candidates after this buffer's, pixel by pixel.
    pub fn merge(&mut self, other: &CandidateBuffer<T>) {
        assert_eq!(self.dims(), other.dims(), "merge requires equal dimensions");
        let cap = self.capacity;
        let dropped: u64 = self
            .slots
            .par_chunks_mut(cap)
            .zip(self.lens.par_iter_mut())
            .enumerate()
            .map(|(i, (slots, len))| {
                other
                    .at_index(i)
                    .iter()
                    .filter(|&&c| push_dedup(slots, len, c) == PushOutcome::Full)
                    .count() as u64
            })
            .sum();
        self.dropped += dropped;
    }

    pub(crate) fn par_pixels_mut(
        &mut self,
    ) -> impl IndexedParallelIterator<Item = (usize, (&mut [Candidate<T>], &mut u32))> {
        self.slots
            .par_chunks_mut(self.capacity)
            .zip(self.lens.par_iter_mut())
            .enumerate()
    }

    pub(crate) fn add_dropped(&mut self, n: u64) {
        self.dropped += n;
    }

    /// First pixel with no candidates, if any.
    pub fn first_empty(&self) -> Option<(usize, usize)> {
        self.lens
            .iter()
            .position(|&n| n == 0)
            .map(|i| (i % self.width, i / self.width))
    }
}
