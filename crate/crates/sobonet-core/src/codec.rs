//! Bit-exact network serialization under a finite weight dictionary.
//!
//! A coding scheme fixes the accuracy ε, a rounding exponent ν, a
//! magnitude exponent θ, and the set of storable weights: scaffold weights
//! are kept verbatim in a header dictionary, and final-layer weights live
//! on the grid ε^ν·ℤ clamped to [−ε^{−θ}, ε^{−θ}]. Every nonzero weight is
//! stored as one record with a K-bit index into dictionary-then-grid,
//! K = ⌈C₀·log₂(1/ε)⌉. Encoding is injective and decoding reproduces the
//! network weight-for-weight, bit for bit.

use alloc::string::String;
use alloc::vec::Vec;

use crate::act::Activation;
use crate::error::Error;
use crate::math;
use crate::net::{Layer, Network};

const MAGIC: [u8; 4] = *b"SBN1";
/// Largest grid half-count before f64 index arithmetic loses exactness
/// headroom; also bounds header arithmetic.
const MAX_GRID_HALF: f64 = 1e30;

#[derive(Debug, Clone)]
pub struct CodingScheme {
    pub activation: Activation,
    pub eps: f64,
    /// Rounding exponent: final-layer grid step is ε^ν.
    pub nu: f64,
    /// Magnitude exponent: grid clamp is ε^{−θ}.
    pub theta: f64,
    /// Bits-per-weight constant; K = ⌈C₀·log₂(1/ε)⌉.
    pub c0: f64,
    /// Index width K in bits.
    pub bits: u32,
    /// Scaffold weights, deduplicated, sorted by bit pattern.
    pub dictionary: Vec<f64>,
}

impl CodingScheme {
    /// Builds the scheme for `net`: dictionary from all layers but the
    /// last, index width sized to cover dictionary plus grid.
    pub fn for_network(net: &Network, eps: f64, nu: f64, theta: f64) -> Result<Self, Error> {
        check_eps(eps)?;
        check_exponents(eps, nu, theta)?;
        let mut bits_seen: Vec<u64> = Vec::new();
        let last = net.layers.len() - 1;
        for layer in &net.layers[..last] {
            for &(_, _, w) in &layer.entries {
                bits_seen.push(w.to_bits());
            }
            for &b in &layer.bias {
                if b != 0.0 {
                    bits_seen.push(b.to_bits());
                }
            }
        }
        bits_seen.sort_unstable();
        bits_seen.dedup();
        let dictionary: Vec<f64> = bits_seen.into_iter().map(f64::from_bits).collect();
        let half = grid_half(eps, nu, theta);
        let total = dictionary.len() as u128 + 2 * half + 1;
        let bits = (128 - (total - 1).leading_zeros()).max(1);
        let c0 = bits as f64 / math::log2(1.0 / eps);
        Ok(CodingScheme {
            activation: net.activation,
            eps,
            nu,
            theta,
            c0,
            bits,
            dictionary,
        })
    }

    fn grid_step(&self) -> f64 {
        math::powf(self.eps, self.nu)
    }

    fn grid_half_count(&self) -> u128 {
        grid_half(self.eps, self.nu, self.theta)
    }
}

fn grid_half(eps: f64, nu: f64, theta: f64) -> u128 {
    math::floor(math::powf(eps, -(theta + nu))) as u128
}

fn check_eps(eps: f64) -> Result<(), Error> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "eps",
            message: alloc::format!("accuracy must lie in (0, 0.5), got {eps}"),
        })
    }
}

fn check_exponents(eps: f64, nu: f64, theta: f64) -> Result<(), Error> {
    if !(nu >= 0.0 && theta >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "nu",
            message: String::from("rounding and magnitude exponents must be nonnegative"),
        });
    }
    if math::powf(eps, -(theta + nu)) > MAX_GRID_HALF {
        return Err(Error::InvalidParameter {
            name: "theta",
            message: alloc::format!(
                "grid cardinality overflows at eps={eps}, nu={nu}, theta={theta}"
            ),
        });
    }
    Ok(())
}

/// Rounds every final-layer weight and bias of `net` to the grid
/// ε^ν·ℤ ∩ [−ε^{−θ}, ε^{−θ}], ties to even. Other layers are untouched.
pub fn round_output_layer(net: &Network, eps: f64, theta: f64, nu: f64) -> Result<Network, Error> {
    check_eps(eps)?;
    check_exponents(eps, nu, theta)?;
    let step = math::powf(eps, nu);
    let half = grid_half(eps, nu, theta) as i128;
    let snap = |v: f64| -> f64 {
        let k = libm::rint(v / step) as i128;
        let k = k.clamp(-half, half);
        k as f64 * step
    };
    let mut out = net.clone();
    let last = out.layers.len() - 1;
    let old = &out.layers[last];
    let entries = old
        .entries
        .iter()
        .map(|&(r, c, w)| (r, c, snap(w)))
        .collect();
    let bias = old.bias.iter().map(|&b| snap(b)).collect();
    out.layers[last] = Layer::new(old.rows, old.cols, entries, bias);
    Ok(out)
}

/// Smallest magnitude exponent at least `floor` whose clamp ε^{−θ} covers
/// every final-layer weight of `net`, so rounding under it never clips.
pub fn covering_theta(net: &Network, eps: f64, floor: f64) -> f64 {
    let last = net.layers.last().expect("networks have layers");
    let scale = last
        .entries
        .iter()
        .map(|&(_, _, w)| math::abs(w))
        .chain(last.bias.iter().map(|&b| math::abs(b)))
        .fold(1.0f64, math::fmax);
    math::fmax(floor, math::ceil(math::ln(scale * 1.0001) / math::ln(1.0 / eps)))
}

/// Suggested rounding exponent for `net` at accuracy ε: twice the largest
/// measured magnitude scale plus two, capped so grid indices stay exactly
/// representable in f64.
pub fn suggest_nu(net: &Network, eps: f64) -> f64 {
    let log_inv = math::ln(1.0 / eps);
    let m = net.stats().connections.max(1) as f64;
    let first_scale = net.layers[0]
        .entries
        .iter()
        .fold(1.0f64, |a, &(_, _, w)| math::fmax(a, math::abs(w)));
    let s_hat = math::fmax(0.0, math::fmax(math::ln(m), math::ln(first_scale)) / log_inv);
    let last = net.layers.last().expect("networks have layers");
    let last_scale = last
        .entries
        .iter()
        .map(|&(_, _, w)| math::abs(w))
        .chain(last.bias.iter().map(|&b| math::abs(b)))
        .fold(1.0f64, math::fmax);
    let cap = math::floor((52.0 * core::f64::consts::LN_2 - math::ln(last_scale)) / log_inv);
    math::fmax(2.0, math::fmin(math::ceil(2.0 * s_hat + 2.0), cap))
}

/// Serializes `net` under `scheme`. Fails with `UnencodableWeight` when a
/// scaffold weight is missing from the dictionary or a final-layer weight
/// is off-grid.
pub fn encode(net: &Network, scheme: &CodingScheme) -> Result<Vec<u8>, Error> {
    let depth = net.layers.len();
    if depth > 255 {
        return Err(Error::InvalidParameter {
            name: "net",
            message: alloc::format!("streams carry at most 255 layers, got {depth}"),
        });
    }
    let mut records: Vec<(u8, u32, u32, u128)> = Vec::new();
    let step = scheme.grid_step();
    let half = scheme.grid_half_count();
    for (li, layer) in net.layers.iter().enumerate() {
        let is_last = li == depth - 1;
        let sentinel = layer.cols as u32;
        let dict_len = scheme.dictionary.len() as u128;
        let mut push = |row: u32, col: u32, w: f64| -> Result<(), Error> {
            let index = if is_last {
                dict_len
                    + grid_index(w, step, half).ok_or(Error::UnencodableWeight {
                        layer: li,
                        row: row as usize,
                        col: col as usize,
                        value: w,
                    })?
            } else {
                let bits = w.to_bits();
                let pos = scheme
                    .dictionary
                    .binary_search_by(|d| d.to_bits().cmp(&bits))
                    .map_err(|_| Error::UnencodableWeight {
                        layer: li,
                        row: row as usize,
                        col: col as usize,
                        value: w,
                    })?;
                pos as u128
            };
            records.push((li as u8, row, col, index));
            Ok(())
        };
        for &(r, c, w) in &layer.entries {
            push(r, c, w)?;
        }
        for (r, &b) in layer.bias.iter().enumerate() {
            if b != 0.0 {
                push(r as u32, sentinel, b)?;
            }
        }
    }
    let mut w = BitWriter::new();
    for byte in MAGIC {
        w.push(8, byte as u128);
    }
    w.push(64, scheme.c0.to_bits() as u128);
    w.push(64, scheme.eps.to_bits() as u128);
    w.push(32, records.len() as u128);
    w.push(32, depth as u128);
    for width in net.widths() {
        w.push(32, width as u128);
    }
    w.push(32, scheme.dictionary.len() as u128);
    for &d in &scheme.dictionary {
        w.push(64, d.to_bits() as u128);
    }
    for (layer, row, col, index) in records {
        w.push(8, layer as u128);
        w.push(32, row as u128);
        w.push(32, col as u128);
        w.push(scheme.bits, index);
    }
    Ok(w.finish())
}

fn grid_index(w: f64, step: f64, half: u128) -> Option<u128> {
    let k = libm::rint(w / step) as i128;
    if k.unsigned_abs() > half {
        return None;
    }
    if k as f64 * step != w {
        return None;
    }
    Some((k + half as i128) as u128)
}

/// Reconstructs a network from `stream`. The scheme supplies the index
/// width, grid geometry, and activation; the dictionary is read from the
/// stream itself.
pub fn decode(stream: &[u8], scheme: &CodingScheme) -> Result<Network, Error> {
    let mut r = BitReader::new(stream);
    for expected in MAGIC {
        if r.take(8)? as u8 != expected {
            return Err(Error::MalformedStream(String::from("bad magic")));
        }
    }
    let c0 = f64::from_bits(r.take(64)? as u64);
    let eps = f64::from_bits(r.take(64)? as u64);
    if c0.to_bits() != scheme.c0.to_bits() || eps.to_bits() != scheme.eps.to_bits() {
        return Err(Error::MalformedStream(String::from("scheme mismatch")));
    }
    let m = r.take(32)? as usize;
    let depth = r.take(32)? as usize;
    if depth == 0 || depth > 255 {
        return Err(Error::MalformedStream(alloc::format!("implausible depth {depth}")));
    }
    let mut widths = Vec::with_capacity(depth + 1);
    for _ in 0..=depth {
        let width = r.take(32)? as usize;
        if width == 0 {
            return Err(Error::MalformedStream(String::from("zero layer width")));
        }
        widths.push(width);
    }
    // Corrupted counts must fail before they reach an allocator, so sizes
    // are capped against the stream itself and a generous unit budget.
    let units: usize = widths.iter().sum();
    if units > 1 << 22 {
        return Err(Error::MalformedStream(alloc::format!("implausible total width {units}")));
    }
    let dict_len = r.take(32)? as usize;
    if dict_len > stream.len() / 8 {
        return Err(Error::MalformedStream(alloc::format!(
            "dictionary of {dict_len} words cannot fit the stream"
        )));
    }
    let mut dictionary = Vec::with_capacity(dict_len);
    for _ in 0..dict_len {
        dictionary.push(f64::from_bits(r.take(64)? as u64));
    }
    let step = scheme.grid_step();
    let half = scheme.grid_half_count();
    let grid_count = 2 * half + 1;
    let mut entries: Vec<Vec<(u32, u32, f64)>> = alloc::vec![Vec::new(); depth];
    let mut biases: Vec<Vec<f64>> = widths[1..]
        .iter()
        .map(|&rows| alloc::vec![0.0f64; rows])
        .collect();
    for _ in 0..m {
        let layer = r.take(8)? as usize;
        let row = r.take(32)? as usize;
        let col = r.take(32)? as usize;
        let index = r.take(scheme.bits)?;
        if layer >= depth || row >= widths[layer + 1] || col > widths[layer] {
            return Err(Error::MalformedStream(String::from("record out of range")));
        }
        let is_last = layer == depth - 1;
        let value = if is_last {
            if index < dict_len as u128 || index - dict_len as u128 >= grid_count {
                return Err(Error::MalformedStream(String::from("grid index out of range")));
            }
            let k = (index - dict_len as u128) as i128 - half as i128;
            k as f64 * step
        } else {
            if index >= dict_len as u128 {
                return Err(Error::MalformedStream(String::from(
                    "dictionary index out of range",
                )));
            }
            dictionary[index as usize]
        };
        if col == widths[layer] {
            if biases[layer][row] != 0.0 {
                return Err(Error::MalformedStream(String::from("duplicate bias record")));
            }
            biases[layer][row] = value;
        } else {
            if entries[layer].iter().any(|&(er, ec, _)| er == row as u32 && ec == col as u32) {
                return Err(Error::MalformedStream(String::from("duplicate entry record")));
            }
            entries[layer].push((row as u32, col as u32, value));
        }
    }
    r.expect_padding()?;
    let mut layers = Vec::with_capacity(depth);
    for (li, (rows_entries, bias)) in entries.into_iter().zip(biases).enumerate() {
        layers.push(Layer::new(widths[li + 1], widths[li], rows_entries, bias));
    }
    Network::new(widths[0], scheme.activation, layers)
}

/// Information-theoretic floor C·ε^{−γ}/log₂(1/ε) on the weight count of
/// any ε-accurate encodable approximant family with rate exponent γ.
pub fn entropy_floor(gamma: f64, c: f64, eps: f64) -> f64 {
    c * math::powf(eps, -gamma) / math::log2(1.0 / eps)
}

struct BitWriter {
    buf: Vec<u8>,
    current: u8,
    filled: u32,
}

impl BitWriter {
    fn new() -> Self {
        BitWriter { buf: Vec::new(), current: 0, filled: 0 }
    }

    fn push(&mut self, width: u32, value: u128) {
        for i in (0..width).rev() {
            let bit = ((value >> i) & 1) as u8;
            self.current = (self.current << 1) | bit;
            self.filled += 1;
            if self.filled == 8 {
                self.buf.push(self.current);
                self.current = 0;
                self.filled = 0;
            }
        }
    }

    fn finish(mut self) -> Vec<u8> {
        if self.filled > 0 {
            self.current <<= 8 - self.filled;
            self.buf.push(self.current);
        }
        self.buf
    }
}

struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    bit: u32,
}

impl<'a> BitReader<'a> {
    fn new(data: &'a [u8]) -> Self {
        BitReader { data, pos: 0, bit: 0 }
    }

    fn take(&mut self, width: u32) -> Result<u128, Error> {
        let mut value = 0u128;
        for _ in 0..width {
            if self.pos >= self.data.len() {
                return Err(Error::MalformedStream(String::from("truncated stream")));
            }
            let bit = (self.data[self.pos] >> (7 - self.bit)) & 1;
            value = (value << 1) | bit as u128;
            self.bit += 1;
            if self.bit == 8 {
                self.bit = 0;
                self.pos += 1;
            }
        }
        Ok(value)
    }

    /// After the last record only zero padding within the final byte may
    /// remain.
    fn expect_padding(&mut self) -> Result<(), Error> {
        if self.bit > 0 {
            let rest = self.data[self.pos] & (0xff >> self.bit);
            if rest != 0 {
                return Err(Error::MalformedStream(String::from("nonzero padding")));
            }
            self.pos += 1;
            self.bit = 0;
        }
        if self.pos != self.data.len() {
            return Err(Error::MalformedStream(String::from("trailing bytes")));
        }
        Ok(())
    }
}
