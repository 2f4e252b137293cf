//! One-bit full-adder cells and the word-level ripple structures built from
//! them.
//!
//! Three cell flavors exist:
//!
//! * `Exact` — ordinary full adder, sum and carry both correct.
//! * `CarryOnly` — computes the exact carry-out but has no sum output (the
//!   sum wire is dropped because a downstream shift discards that bit
//!   position). Modeled here as sum = 0.
//! * `ApproxLOA` — lower-part-OR cell: sum = a OR b, carry-out = a AND b,
//!   carry-in ignored. There is no carry chain inside an LOA prefix; the
//!   only carry leaving it is the AND of the topmost prefix bit pair.
//!
//! Words are stored LSB-first as explicit bit vectors so every adder result
//! is the bit pattern the hardware would produce, not a rounded integer.

use crate::{Error, Result};

pub type Bit = bool;

/// Exact full adder: sum = a xor b xor cin, cout = majority(a, b, cin).
#[inline]
pub fn fa_exact(a: Bit, b: Bit, cin: Bit) -> (Bit, Bit) {
    let sum = a ^ b ^ cin;
    let cout = (a & b) | (a & cin) | (b & cin);
    (sum, cout)
}

/// Carry-only cell: exact carry-out, sum output absent (fixed to 0).
#[inline]
pub fn fa_carry_only(a: Bit, b: Bit, cin: Bit) -> (Bit, Bit) {
    let (_, cout) = fa_exact(a, b, cin);
    (false, cout)
}

/// Lower-part-OR cell: sum = a | b, cout = a & b, cin ignored.
#[inline]
pub fn fa_approx(a: Bit, b: Bit, _cin: Bit) -> (Bit, Bit) {
    (a | b, a & b)
}

/// Fixed-width binary word, least-significant bit first.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    bits: Vec<Bit>,
}

impl Word {
    /// Builds a word from the low `width` bits of `value`. Fails if `value`
    /// does not fit.
    pub fn from_unsigned(value: u64, width: usize) -> Result<Self> {
        assert!((1..=64).contains(&width));
        if width < 64 && value >> width != 0 {
            return Err(Error::Range { value, width });
        }
        Ok(Self {
            bits: (0..width).map(|i| value >> i & 1 == 1).collect(),
        })
    }

    pub fn zero(width: usize) -> Self {
        assert!(width >= 1);
        Self {
            bits: vec![false; width],
        }
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn bit(&self, i: usize) -> Bit {
        self.bits[i]
    }

    /// Unsigned interpretation: sum of bits[i] * 2^i.
    pub fn value(&self) -> u64 {
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, &b)| acc | (b as u64) << i)
    }

    /// Two's-complement interpretation at the word's own width.
    pub fn signed_value(&self) -> i64 {
        let u = self.value() as i64;
        let w = self.width();
        if w < 64 && self.bits[w - 1] {
            u - (1i64 << w)
        } else {
            u
        }
    }

    /// Keeps the low `width` bits, dropping the rest.
    pub fn truncate(mut self, width: usize) -> Self {
        assert!(width >= 1 && width <= self.bits.len());
        self.bits.truncate(width);
        self
    }

    fn not(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }
}

impl std::fmt::Debug for Word {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s: String = self
            .bits
            .iter()
            .rev()
            .map(|&b| if b { '1' } else { '0' })
            .collect();
        write!(f, "Word({}b {})", self.width(), s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, serde::Serialize, serde::Deserialize)]
pub enum CellKind {
    Exact,
    CarryOnly,
    ApproxLOA,
}

/// Per-position cell layout of a ripple adder: an approximate prefix
/// (carry-only or LOA) starting at the LSB, exact cells above it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdderConfig {
    cells: Vec<CellKind>,
}

impl AdderConfig {
    pub fn all_exact(width: usize) -> Self {
        assert!(width >= 1);
        Self {
            cells: vec![CellKind::Exact; width],
        }
    }

    /// `prefix_len` approximate cells of `kind` at the LSB end, exact cells
    /// above.
    pub fn with_prefix(width: usize, kind: CellKind, prefix_len: usize) -> Result<Self> {
        if width == 0 {
            return Err(Error::Config("adder width must be at least 1".into()));
        }
        if prefix_len > width {
            return Err(Error::Config(format!(
                "approximate prefix {prefix_len} exceeds adder width {width}"
            )));
        }
        let mut cells = vec![kind; prefix_len];
        cells.resize(width, CellKind::Exact);
        Ok(Self { cells })
    }

    pub fn width(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    /// Length of the approximate prefix (0 for an all-exact adder).
    pub fn prefix_len(&self) -> usize {
        self.cells
            .iter()
            .take_while(|&&c| c != CellKind::Exact)
            .count()
    }

    /// Kind of the approximate prefix, if any.
    pub fn prefix_kind(&self) -> Option<CellKind> {
        (self.prefix_len() > 0).then(|| self.cells[0])
    }

    pub fn is_all_exact(&self) -> bool {
        self.prefix_len() == 0
    }
}

fn check_widths(x: &Word, y: &Word, cfg: &AdderConfig) -> Result<()> {
    if x.width() != cfg.width() || y.width() != cfg.width() {
        return Err(Error::Config(format!(
            "operand widths {}/{} do not match adder width {}",
            x.width(),
            y.width(),
            cfg.width()
        )));
    }
    Ok(())
}

fn ripple_add_with_cin(x: &Word, y: &Word, cfg: &AdderConfig, cin: Bit) -> Word {
    let width = cfg.width();
    let mut bits = Vec::with_capacity(width + 1);
    let mut carry = cin;
    for i in 0..width {
        let (sum, cout) = match cfg.cells[i] {
            CellKind::Exact => fa_exact(x.bit(i), y.bit(i), carry),
            CellKind::CarryOnly => fa_carry_only(x.bit(i), y.bit(i), carry),
            CellKind::ApproxLOA => fa_approx(x.bit(i), y.bit(i), carry),
        };
        bits.push(sum);
        carry = cout;
    }
    bits.push(carry);
    Word { bits }
}

/// Ripple addition under `cfg`. The result is one bit wider than the inputs,
/// with the final carry-out as its MSB, so no sum ever overflows silently.
pub fn ripple_add(x: &Word, y: &Word, cfg: &AdderConfig) -> Result<Word> {
    check_widths(x, y, cfg)?;
    Ok(ripple_add_with_cin(x, y, cfg, false))
}

/// Two's-complement subtraction x - y, built as x + !y + 1 on the configured
/// cells. An LOA LSB cell absorbs the injected carry-in (it ignores cin); for
/// exact and carry-only prefixes the carry-in ripples normally. The final
/// carry-out is the no-borrow flag: the signed result is the low width bits
/// minus 2^width when that carry is 0.
pub fn ripple_sub(x: &Word, y: &Word, cfg: &AdderConfig) -> Result<i64> {
    check_widths(x, y, cfg)?;
    let width = cfg.width();
    let raw = ripple_add_with_cin(x, &y.not(), cfg, true);
    let no_borrow = raw.bit(width);
    let low = raw.truncate(width).value() as i64;
    Ok(if no_borrow { low } else { low - (1i64 << width) })
}

/// Comparator that inspects only bits k..width of both operands:
/// returns u(x) >> k >= u(threshold) >> k.
pub fn truncated_compare_ge(x: &Word, threshold: &Word, k: usize) -> Result<Bit> {
    if k >= x.width() {
        return Err(Error::Config(format!(
            "cannot ignore {k} LSBs of a {}-bit comparator",
            x.width()
        )));
    }
    if threshold.width() != x.width() {
        return Err(Error::Config(format!(
            "threshold width {} does not match operand width {}",
            threshold.width(),
            x.width()
        )));
    }
    for i in (k..x.width()).rev() {
        if x.bit(i) != threshold.bit(i) {
            return Ok(x.bit(i));
        }
    }
    Ok(true)
}
