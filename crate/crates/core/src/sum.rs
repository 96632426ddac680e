use num_complex::Complex64;

/// Neumaier-compensated running sum.
///
/// Used for every reduction with many terms so results do not depend on
/// accumulated rounding in a long naive loop.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Terms summed directly before a block total enters the compensated sum.
pub(crate) const SUM_BLOCK: usize = 64;

/// Blocked compensated sum of complex terms.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
    block: Complex64,
    count: usize,
}

impl ComplexSum {
    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.block += z;
        self.count += 1;
        if self.count == SUM_BLOCK {
            self.flush();
        }
    }

    fn flush(&mut self) {
        self.re.add(self.block.re);
        self.im.add(self.block.im);
        self.block = Complex64::new(0.0, 0.0);
        self.count = 0;
    }

    pub fn total(mut self) -> Complex64 {
        self.flush();
        Complex64::new(self.re.total(), self.im.total())
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = ComplexSum::default();
        for z in iter {
            s.add(z);
        }
        s
    }
}
