//! The golden-mean subshift: binary sequences without two adjacent `1`s.
//!
//! A word of length `n` in cyclic mode stands for the periodic sequence it
//! repeats, so it is admissible only if the wrap-around pair (last, first)
//! is not `11` either. Cyclic admissible `n`-words are exactly the solutions
//! of `S^n σ = σ`; there are `L_n` (Lucas) of them, while linear admissible
//! `n`-words number `A_n = F_{n+2}`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Linear,
    Cyclic,
}

/// A finite word over `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolicWord {
    symbols: Vec<u8>,
    mode: Mode,
}

impl SymbolicWord {
    pub fn new(symbols: Vec<u8>, mode: Mode) -> Result<Self> {
        if let Some(&s) = symbols.iter().find(|&&s| s > 1) {
            return Err(Error::InvalidParams(format!("symbol {s} is not binary")));
        }
        Ok(Self { symbols, mode })
    }

    pub fn parse(s: &str, mode: Mode) -> Result<Self> {
        let symbols = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidParams(format!("unexpected symbol {other:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Ok(Self { symbols, mode })
    }

    /// Word of length `len` whose symbol `j` is bit `len − 1 − j` of `bits`,
    /// so numeric order equals lexicographic order.
    pub fn from_bits(bits: u64, len: usize, mode: Mode) -> Self {
        assert!(len <= 64);
        let symbols = (0..len).map(|j| ((bits >> (len - 1 - j)) & 1) as u8).collect();
        Self { symbols, mode }
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn with_mode(&self, mode: Mode) -> Self {
        Self { symbols: self.symbols.clone(), mode }
    }

    pub fn is_admissible(&self) -> bool {
        is_admissible(&self.symbols, self.mode)
    }

    /// Linear: drops the first symbol. Cyclic: rotates left by one, which is
    /// the shift of the periodic sequence the word represents.
    pub fn shift(&self) -> Result<Self> {
        if self.symbols.is_empty() {
            return Err(Error::Empty);
        }
        let symbols = match self.mode {
            Mode::Linear => self.symbols[1..].to_vec(),
            Mode::Cyclic => {
                let mut s = self.symbols[1..].to_vec();
                s.push(self.symbols[0]);
                s
            }
        };
        Ok(Self { symbols, mode: self.mode })
    }

    /// Smallest `d` such that the cyclic word is invariant under `d` shifts.
    pub fn least_period(&self) -> usize {
        let n = self.symbols.len();
        (1..=n)
            .find(|&d| n % d == 0 && (0..n).all(|j| self.symbols[j] == self.symbols[(j + d) % n]))
            .unwrap_or(n)
    }

    /// The first `len` symbols of the periodic sequence (cyclic) or of the
    /// word itself (linear; `len` must not exceed its length).
    pub fn prefix(&self, len: usize) -> Vec<u8> {
        match self.mode {
            Mode::Linear => self.symbols[..len.min(self.symbols.len())].to_vec(),
            Mode::Cyclic => (0..len).map(|j| self.symbols[j % self.symbols.len()]).collect(),
        }
    }
}

impl fmt::Display for SymbolicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for SymbolicWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, Mode::Linear)
    }
}

/// No `11` inside the word; in cyclic mode also not across the wrap.
pub fn is_admissible(symbols: &[u8], mode: Mode) -> bool {
    let inner = symbols.windows(2).all(|w| w[0] & w[1] == 0);
    match mode {
        Mode::Linear => inner,
        Mode::Cyclic => {
            inner && !(symbols.len() > 1 && symbols[0] == 1 && symbols[symbols.len() - 1] == 1)
                && !(symbols.len() == 1 && symbols[0] == 1)
        }
    }
}

/// Mask form of [`is_admissible`] for words packed by [`SymbolicWord::from_bits`].
#[inline]
pub fn is_admissible_bits(w: u64, len: usize, mode: Mode) -> bool {
    if w & (w >> 1) != 0 {
        return false;
    }
    match mode {
        Mode::Linear => true,
        Mode::Cyclic => {
            if len == 0 {
                return true;
            }
            let first = (w >> (len - 1)) & 1;
            let last = w & 1;
            first & last == 0
        }
    }
}

/// `Σ_j |σ_j − θ_j| / 2^j` over two equal-length prefixes.
pub fn sigma_metric(p: &[u8], q: &[u8]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch(p.len(), q.len()));
    }
    let mut sum = 0.0;
    let mut weight = 1.0;
    for (&s, &t) in p.iter().zip(q) {
        if s != t {
            sum += weight;
        }
        weight *= 0.5;
    }
    Ok(sum)
}

/// All admissible words of length `n` in lexicographic order, generated
/// depth-first without visiting inadmissible prefixes.
pub fn admissible_words(n: usize, mode: Mode) -> Vec<SymbolicWord> {
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(n);
    fn extend(buf: &mut Vec<u8>, n: usize, mode: Mode, out: &mut Vec<SymbolicWord>) {
        if buf.len() == n {
            if mode == Mode::Linear || is_admissible(buf, Mode::Cyclic) {
                out.push(SymbolicWord { symbols: buf.clone(), mode });
            }
            return;
        }
        buf.push(0);
        extend(buf, n, mode, out);
        buf.pop();
        if buf.last() != Some(&1) {
            buf.push(1);
            extend(buf, n, mode, out);
            buf.pop();
        }
    }
    extend(&mut buf, n, mode, &mut out);
    out
}

/// Largest length for which [`enumerate_periodic`] lists words exhaustively.
pub const MAX_ENUMERATION_LENGTH: usize = 30;

/// Largest `n` accepted by [`counts`].
pub const MAX_COUNT_N: u64 = 1_000_000;

/// Largest `n` for which [`counts`] also checks its values by brute force.
pub const EXHAUSTIVE_CHECK_N: u64 = 20;

/// Counts attached to a word length `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountTable {
    pub n: u64,
    /// Admissible linear `n`-words.
    pub a_n: BigUint,
    /// Admissible cyclic `n`-words, i.e. solutions of `S^n σ = σ`.
    pub b_n: BigUint,
    pub f_n: BigUint,
    pub l_n: BigUint,
    /// Whether `a_n` and `b_n` were confirmed by brute-force enumeration.
    pub exhaustively_verified: bool,
}

fn big_to_json(v: &BigUint) -> Value {
    match u64::try_from(v) {
        Ok(x) => json!(x),
        Err(_) => json!(v.to_string()),
    }
}

impl CountTable {
    /// `{n, A_n, B_n, F_n, L_n}`; values above `u64::MAX` become decimal strings.
    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "A_n": big_to_json(&self.a_n),
            "B_n": big_to_json(&self.b_n),
            "F_n": big_to_json(&self.f_n),
            "L_n": big_to_json(&self.l_n),
        })
    }
}

/// `(F_k, F_{k+1})` by fast doubling.
fn fib_pair(k: u64) -> (BigUint, BigUint) {
    if k == 0 {
        return (BigUint::from(0u32), BigUint::from(1u32));
    }
    let (a, b) = fib_pair(k / 2);
    // F_{2m} = F_m (2F_{m+1} − F_m), F_{2m+1} = F_m² + F_{m+1}²
    let two_b = &b << 1usize;
    let c = &a * (two_b - &a);
    let d = &a * &a + &b * &b;
    if k % 2 == 0 {
        (c, d)
    } else {
        let e = &c + &d;
        (d, e)
    }
}

pub fn fibonacci(k: u64) -> BigUint {
    fib_pair(k).0
}

/// `L_n = F_{n+1} + F_{n−1}` (`L_0 = 2`).
pub fn lucas(n: u64) -> BigUint {
    if n == 0 {
        return BigUint::from(2u32);
    }
    let (f_nm1, f_n) = fib_pair(n - 1);
    &f_nm1 + &f_n + &f_nm1
}

/// `A_n = F_{n+2}` (`A_0 = 1`, the empty word).
fn count_linear(n: u64) -> BigUint {
    fibonacci(n + 2)
}

/// `B_1 = 1`, `B_2 = 3`, then `B_{n+1} = A_n + A_{n−2}`.
fn count_cyclic(n: u64) -> BigUint {
    match n {
        0 => BigUint::from(1u32),
        1 => BigUint::from(1u32),
        2 => BigUint::from(3u32),
        _ => count_linear(n - 1) + count_linear(n - 3),
    }
}

/// Brute-force count over all `2^n` bit patterns.
pub fn brute_force_count(n: usize, mode: Mode) -> u64 {
    assert!(n <= 32);
    (0u64..(1u64 << n)).filter(|&w| is_admissible_bits(w, n, mode)).count() as u64
}

pub fn counts(n: u64) -> Result<CountTable> {
    if n == 0 || n > MAX_COUNT_N {
        return Err(Error::InvalidParams(format!("counts needs 1 <= n <= {MAX_COUNT_N}, got {n}")));
    }
    let a_n = count_linear(n);
    let b_n = count_cyclic(n);
    let (f_nm1, f_n) = fib_pair(n - 1);
    let f_np1 = &f_nm1 + &f_n;
    let l_n = &f_np1 + &f_nm1;
    let exhaustively_verified = n <= EXHAUSTIVE_CHECK_N && {
        let nn = n as usize;
        BigUint::from(brute_force_count(nn, Mode::Linear)) == a_n
            && BigUint::from(brute_force_count(nn, Mode::Cyclic)) == b_n
    };
    Ok(CountTable { n, a_n, b_n, f_n, l_n, exhaustively_verified })
}

/// Trace of `[[1,1],[1,0]]^n`, an independent route to `L_n`.
pub fn transfer_matrix_trace(n: u64) -> BigUint {
    type M = [[BigUint; 2]; 2];
    fn mul(x: &M, y: &M) -> M {
        let e = |i: usize, j: usize| &x[i][0] * &y[0][j] + &x[i][1] * &y[1][j];
        [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
    }
    let one = || BigUint::from(1u32);
    let zero = || BigUint::from(0u32);
    let mut result: M = [[one(), zero()], [zero(), one()]];
    let mut base: M = [[one(), one()], [one(), zero()]];
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result = mul(&result, &base);
        }
        base = mul(&base, &base);
        k >>= 1;
    }
    &result[0][0] + &result[1][1]
}

/// Cyclic admissible `n`-words together with their counts. The list is
/// cross-checked against the Lucas number and the transfer-matrix trace.
#[derive(Debug, Clone)]
pub struct PeriodicEnumeration {
    pub words: Vec<SymbolicWord>,
    pub counts: CountTable,
    pub matches_lucas: bool,
    pub matches_trace: bool,
}

pub fn enumerate_periodic(n: usize) -> Result<PeriodicEnumeration> {
    if n == 0 || n > MAX_ENUMERATION_LENGTH {
        return Err(Error::InvalidParams(format!(
            "enumeration needs 1 <= n <= {MAX_ENUMERATION_LENGTH}, got {n}"
        )));
    }
    let words = admissible_words(n, Mode::Cyclic);
    let counts = counts(n as u64)?;
    let len = BigUint::from(words.len());
    let matches_lucas = len == counts.l_n && len == counts.b_n;
    let matches_trace = len == transfer_matrix_trace(n as u64);
    Ok(PeriodicEnumeration { words, counts, matches_lucas, matches_trace })
}

/// Shift orbits of cyclic admissible `n`-words: one representative (the
/// lexicographically smallest rotation) per orbit, with its least period.
pub fn cyclic_orbits(n: usize) -> Vec<(usize, SymbolicWord)> {
    let mut out = Vec::new();
    for w in admissible_words(n, Mode::Cyclic) {
        let mut rot = w.clone();
        let mut smallest = true;
        for _ in 1..n {
            rot = rot.shift().expect("non-empty");
            if rot.symbols < w.symbols {
                smallest = false;
                break;
            }
        }
        if smallest {
            let d = w.least_period();
            out.push((d, w));
        }
    }
    out
}

/// Concatenation of the first `blocks` admissible words in length-then-lex
/// order, each followed by a separating `0`. The infinite version of this
/// sequence has a dense orbit under the shift.
pub fn dense_orbit_prefix(blocks: usize) -> SymbolicWord {
    let mut symbols = Vec::new();
    let mut emitted = 0;
    let mut len = 1;
    'outer: while emitted < blocks {
        for w in admissible_words(len, Mode::Linear) {
            if emitted == blocks {
                break 'outer;
            }
            symbols.extend_from_slice(&w.symbols);
            symbols.push(0);
            emitted += 1;
        }
        len += 1;
    }
    SymbolicWord { symbols, mode: Mode::Linear }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str, mode: Mode) -> SymbolicWord {
        SymbolicWord::parse(s, mode).unwrap()
    }

    #[test]
    fn admissibility() {
        assert!(w("0101", Mode::Linear).is_admissible());
        assert!(w("0101", Mode::Cyclic).is_admissible());
        assert!(!w("0110", Mode::Linear).is_admissible());
        assert!(w("1001", Mode::Linear).is_admissible());
        assert!(!w("1001", Mode::Cyclic).is_admissible());
        assert!(!w("1", Mode::Cyclic).is_admissible());
        assert!(w("1", Mode::Linear).is_admissible());
        assert!(SymbolicWord::parse("012", Mode::Linear).is_err());
    }

    #[test]
    fn packed_admissibility_agrees() {
        for n in 1..=12 {
            for bits in 0u64..(1 << n) {
                let word = SymbolicWord::from_bits(bits, n, Mode::Linear);
                for mode in [Mode::Linear, Mode::Cyclic] {
                    assert_eq!(is_admissible_bits(bits, n, mode), is_admissible(word.symbols(), mode));
                }
            }
        }
    }

    #[test]
    fn shift_behaviour() {
        assert_eq!(w("100", Mode::Cyclic).shift().unwrap(), w("001", Mode::Cyclic));
        assert_eq!(w("100", Mode::Linear).shift().unwrap(), w("00", Mode::Linear));
        assert_eq!(w("0000", Mode::Cyclic).shift().unwrap(), w("0000", Mode::Cyclic));
        assert_eq!(SymbolicWord::new(vec![], Mode::Linear).unwrap().shift(), Err(Error::Empty));
        for word in admissible_words(9, Mode::Cyclic) {
            assert!(word.shift().unwrap().is_admissible());
        }
    }

    #[test]
    fn metric_values() {
        assert_eq!(sigma_metric(&[0, 1, 0], &[0, 1, 0]).unwrap(), 0.0);
        assert_eq!(sigma_metric(&[1, 0, 0], &[0, 0, 0]).unwrap(), 1.0);
        assert_eq!(sigma_metric(&[0, 1], &[1, 0]).unwrap(), 1.5);
        assert!(matches!(sigma_metric(&[0], &[0, 1]), Err(Error::LengthMismatch(1, 2))));
    }

    #[test]
    fn small_enumerations() {
        let e1 = enumerate_periodic(1).unwrap();
        assert_eq!(e1.words, vec![w("0", Mode::Cyclic)]);
        let e2 = enumerate_periodic(2).unwrap();
        let s2: Vec<String> = e2.words.iter().map(|w| w.to_string()).collect();
        assert_eq!(s2, ["00", "01", "10"]);
        let e3 = enumerate_periodic(3).unwrap();
        let s3: Vec<String> = e3.words.iter().map(|w| w.to_string()).collect();
        assert_eq!(s3, ["000", "001", "010", "100"]);
        assert!(e3.matches_lucas && e3.matches_trace);
        assert!(enumerate_periodic(0).is_err());
        assert!(enumerate_periodic(31).is_err());
    }

    #[test]
    fn count_values() {
        let c1 = counts(1).unwrap();
        assert_eq!(c1.a_n, BigUint::from(2u32));
        assert_eq!(c1.b_n, BigUint::from(1u32));
        let expected_a = [3u32, 5, 8];
        for (n, a) in (2..=4).zip(expected_a) {
            let c = counts(n).unwrap();
            assert_eq!(c.a_n, BigUint::from(a));
            assert_eq!(c.a_n, fibonacci(n + 2));
        }
        assert_eq!(counts(2).unwrap().b_n, BigUint::from(3u32));
        let c10 = counts(10).unwrap();
        assert_eq!(c10.l_n, BigUint::from(123u32));
        assert_eq!(c10.b_n, BigUint::from(123u32));
        assert!(c10.exhaustively_verified);
        assert!(!counts(21).unwrap().exhaustively_verified);
        assert!(counts(0).is_err());
    }

    #[test]
    fn recurrences_match_brute_force() {
        for n in 1..=20u64 {
            let c = counts(n).unwrap();
            assert!(c.exhaustively_verified, "n={n}");
            assert_eq!(c.b_n, c.l_n);
            assert_eq!(transfer_matrix_trace(n), c.l_n);
            let e = enumerate_periodic(n as usize).unwrap();
            assert!(e.matches_lucas && e.matches_trace);
        }
        let m3 = transfer_matrix_trace(3);
        assert_eq!(m3, BigUint::from(4u32));
    }

    #[test]
    fn large_counts() {
        let c = counts(MAX_COUNT_N).unwrap();
        assert_eq!(c.b_n, c.l_n);
        // L_n ≈ φ^n: digits = n log10 φ rounded up
        let digits = c.l_n.to_string().len();
        assert_eq!(digits, (MAX_COUNT_N as f64 * 1.618033988749895f64.log10()).ceil() as usize);
        assert_eq!(transfer_matrix_trace(300), counts(300).unwrap().l_n);
        assert_eq!(lucas(0), BigUint::from(2u32));
        assert_eq!(lucas(5), BigUint::from(11u32));
    }

    #[test]
    fn orbit_partition() {
        for n in 1..=16usize {
            let total: usize = cyclic_orbits(n).iter().map(|(d, _)| d).sum();
            assert_eq!(BigUint::from(total), counts(n as u64).unwrap().b_n, "n={n}");
        }
        let orbits3 = cyclic_orbits(3);
        assert_eq!(orbits3.len(), 2); // 000 and the orbit of 001
    }

    #[test]
    fn dense_prefix() {
        let p = dense_orbit_prefix(10);
        assert!(p.is_admissible());
        let expected = "0 0 1 0 00 0 01 0 10 0 000 0 001 0 010 0 100 0 101 0".replace(' ', "");
        assert_eq!(dense_orbit_prefix(10).to_string(), expected);
        // block census
        let mut total = 0;
        for n in 1..=8usize {
            let a_n = admissible_words(n, Mode::Linear).len();
            assert_eq!(BigUint::from(a_n), counts(n as u64).unwrap().a_n);
            total += a_n;
        }
        assert!(dense_orbit_prefix(total).is_admissible());
    }

    proptest! {
        #[test]
        fn metric_axioms(a in prop::collection::vec(0u8..2, 24), b in prop::collection::vec(0u8..2, 24), c in prop::collection::vec(0u8..2, 24)) {
            let ab = sigma_metric(&a, &b).unwrap();
            let ba = sigma_metric(&b, &a).unwrap();
            let bc = sigma_metric(&b, &c).unwrap();
            let ac = sigma_metric(&a, &c).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= ab + bc);
            prop_assert_eq!(ab == 0.0, a == b);
        }

        #[test]
        fn shift_preserves_cyclic_admissibility(bits in 0u64..(1 << 20), len in 1usize..=20) {
            let word = SymbolicWord::from_bits(bits & ((1 << len) - 1), len, Mode::Cyclic);
            prop_assert_eq!(word.is_admissible(), word.shift().unwrap().is_admissible());
        }
    }
}
