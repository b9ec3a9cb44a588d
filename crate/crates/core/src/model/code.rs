use serde::{Deserialize, Serialize};

use super::network::{ModifiedNetwork, Network};
use super::schedule::{cumulative_bits, schedule_vector};
use super::checked_pow;
use crate::error::{Error, Result};

/// Decoder of node `dest` for the message of node `source`.
///
/// `table[(w_dest * |Y_dest|^n + y_dest^n) * side + bits]` is the estimate,
/// where `side = 2^k` if `dest` hears the bit pipe and 1 otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoder {
    pub source: usize,
    pub dest: usize,
    pub table: Vec<usize>,
}

/// Tables of node `a`. At 0-based step `t` the state is
/// `(w_v for v in v_set, y_v^{t+1} for v in v_set)` ranked in that order and
/// `tables[t][state]` holds the `schedule[t]` bits sent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipeTables {
    pub v_set: Vec<usize>,
    pub k: u64,
    pub tables: Vec<Vec<u64>>,
}

/// An explicit code of blocklength `n`.
///
/// `encoders[i][t]` maps `(w_i, y_i^t, bits)` to `x_{i,t}` for 0-based `t`,
/// flattened as `(w_i * |Y_i|^t + rank(y_i^t)) * side + bits`. Nodes in the
/// pipe's node set see the pipe bits delivered before step `t`, accumulated
/// most significant first; other nodes have `side = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Code {
    pub n: usize,
    pub message_sizes: Vec<usize>,
    pub encoders: Vec<Vec<Vec<usize>>>,
    pub decoders: Vec<Decoder>,
    #[serde(default)]
    pub pipe: Option<PipeTables>,
}

/// Table dimensions of a code for a given network and pipe.
#[derive(Clone, Debug)]
pub struct CodeLayout {
    pub n: usize,
    pub message_sizes: Vec<usize>,
    pub in_sizes: Vec<usize>,
    pub out_sizes: Vec<usize>,
    pub flows: Vec<(usize, usize)>,
    pub v_set: Vec<usize>,
    pub k: u64,
    pub schedule: Vec<u64>,
}

fn overflow() -> Error {
    Error::Precondition("table size overflows".into())
}

impl CodeLayout {
    pub fn new(net: &Network, n: usize, message_sizes: &[usize], v_set: &[usize], k: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("blocklength must be positive".into()));
        }
        if message_sizes.len() != net.d() {
            return Err(Error::DimensionMismatch { what: "message sizes", expected: net.d(), found: message_sizes.len() });
        }
        if message_sizes.iter().any(|&m| m == 0) {
            return Err(Error::Precondition("message sets must be nonempty".into()));
        }
        net.check_node_set(v_set)?;
        if k > 0 && v_set.is_empty() {
            return Err(Error::Precondition("bit pipe needs a nonempty node set".into()));
        }
        if k >= usize::BITS as u64 {
            return Err(overflow());
        }
        Ok(Self {
            n,
            message_sizes: message_sizes.to_vec(),
            in_sizes: net.input_sizes(),
            out_sizes: net.output_sizes(),
            flows: net.flows(),
            v_set: v_set.to_vec(),
            k,
            schedule: schedule_vector(k, n as u64)?,
        })
    }

    pub fn for_modified(m: &ModifiedNetwork, message_sizes: &[usize]) -> Result<Self> {
        Self::new(&m.base, m.n, message_sizes, &m.v_set, m.k)
    }

    pub fn has_pipe(&self) -> bool {
        !self.v_set.is_empty()
    }

    pub fn hears_pipe(&self, node: usize) -> bool {
        self.v_set.contains(&node)
    }

    pub fn history_count(&self, node: usize, len: usize) -> Result<usize> {
        checked_pow(self.out_sizes[node], len).ok_or_else(overflow)
    }

    /// Number of pipe-bit values visible to `node` before step `t` (0-based).
    pub fn side_count(&self, node: usize, t: usize) -> usize {
        if self.hears_pipe(node) {
            1usize << cumulative_bits(self.k, self.n as u64, t as u64)
        } else {
            1
        }
    }

    pub fn encoder_len(&self, node: usize, t: usize) -> Result<usize> {
        self.message_sizes[node]
            .checked_mul(self.history_count(node, t)?)
            .and_then(|v| v.checked_mul(self.side_count(node, t)))
            .ok_or_else(overflow)
    }

    pub fn decoder_len(&self, dest: usize) -> Result<usize> {
        self.message_sizes[dest]
            .checked_mul(self.history_count(dest, self.n)?)
            .and_then(|v| v.checked_mul(self.side_count(dest, self.n)))
            .ok_or_else(overflow)
    }

    /// Size of node `a`'s state space at 0-based step `t`.
    pub fn pipe_state_count(&self, t: usize) -> Result<usize> {
        let mut c = 1usize;
        for &v in &self.v_set {
            c = c.checked_mul(self.message_sizes[v]).ok_or_else(overflow)?;
        }
        for &v in &self.v_set {
            c = c.checked_mul(self.history_count(v, t + 1)?).ok_or_else(overflow)?;
        }
        Ok(c)
    }

    /// Code with every table entry 0.
    pub fn zero_code(&self) -> Result<Code> {
        let d = self.in_sizes.len();
        let mut encoders = Vec::with_capacity(d);
        for i in 0..d {
            let mut per_t = Vec::with_capacity(self.n);
            for t in 0..self.n {
                per_t.push(vec![0; self.encoder_len(i, t)?]);
            }
            encoders.push(per_t);
        }
        let decoders = self
            .flows
            .iter()
            .map(|&(source, dest)| Ok(Decoder { source, dest, table: vec![0; self.decoder_len(dest)?] }))
            .collect::<Result<Vec<_>>>()?;
        let pipe = if self.has_pipe() {
            let tables = (0..self.n)
                .map(|t| Ok(vec![0; self.pipe_state_count(t)?]))
                .collect::<Result<Vec<_>>>()?;
            Some(PipeTables { v_set: self.v_set.clone(), k: self.k, tables })
        } else {
            None
        };
        Ok(Code { n: self.n, message_sizes: self.message_sizes.clone(), encoders, decoders, pipe })
    }
}

impl Code {
    /// Layout implied by this code's pipe on `net`.
    pub fn layout(&self, net: &Network) -> Result<CodeLayout> {
        let (v_set, k) = match &self.pipe {
            Some(p) => (p.v_set.as_slice(), p.k),
            None => (&[][..], 0),
        };
        CodeLayout::new(net, self.n, &self.message_sizes, v_set, k)
    }

    /// Checks every table against `net`: sizes, symbol ranges and decoder coverage.
    pub fn validate(&self, net: &Network) -> Result<CodeLayout> {
        let layout = self.layout(net)?;
        let bad = |msg: String| Error::InvalidCode(msg);
        if self.encoders.len() != net.d() {
            return Err(bad(format!("expected encoders for {} nodes, found {}", net.d(), self.encoders.len())));
        }
        for (i, per_t) in self.encoders.iter().enumerate() {
            if per_t.len() != self.n {
                return Err(bad(format!("node {i} has {} encoder steps, expected {}", per_t.len(), self.n)));
            }
            for (t, table) in per_t.iter().enumerate() {
                let len = layout.encoder_len(i, t)?;
                if table.len() != len {
                    return Err(bad(format!("encoder ({i},{t}) has {} entries, expected {len}", table.len())));
                }
                if let Some(&x) = table.iter().find(|&&x| x >= layout.in_sizes[i]) {
                    return Err(bad(format!("encoder ({i},{t}) emits symbol {x} outside the input alphabet")));
                }
            }
        }
        let got: Vec<(usize, usize)> = self.decoders.iter().map(|d| (d.source, d.dest)).collect();
        if got != layout.flows {
            return Err(bad(format!("decoders {got:?} do not match demands {:?}", layout.flows)));
        }
        for dec in &self.decoders {
            let len = layout.decoder_len(dec.dest)?;
            if dec.table.len() != len {
                return Err(bad(format!("decoder ({},{}) has {} entries, expected {len}", dec.source, dec.dest, dec.table.len())));
            }
            if dec.table.iter().any(|&w| w >= self.message_sizes[dec.source]) {
                return Err(bad(format!("decoder ({},{}) emits an invalid message", dec.source, dec.dest)));
            }
        }
        if let Some(p) = &self.pipe {
            if p.tables.len() != self.n {
                return Err(bad("pipe table count differs from blocklength".into()));
            }
            for (t, table) in p.tables.iter().enumerate() {
                let len = layout.pipe_state_count(t)?;
                if table.len() != len {
                    return Err(bad(format!("pipe table {t} has {} entries, expected {len}", table.len())));
                }
                let s = layout.schedule[t];
                if table.iter().any(|&b| s < 64 && b >> s != 0) {
                    return Err(bad(format!("pipe table {t} exceeds its {s}-bit budget")));
                }
            }
        }
        Ok(layout)
    }

    /// Point-to-point block code on [`Network::point_to_point`]: `codebook[w][t]`
    /// and a decoder indexed by the rank of `y^n`.
    pub fn block_point_to_point(net: &Network, codebook: &[Vec<usize>], decoder: Vec<usize>) -> Result<Self> {
        let n = codebook.first().map(Vec::len).unwrap_or(0);
        let layout = CodeLayout::new(net, n, &[codebook.len(), 1], &[], 0)?;
        let mut code = layout.zero_code()?;
        for t in 0..n {
            code.encoders[0][t] = codebook.iter().map(|cw| cw[t]).collect();
        }
        code.decoders[0].table = decoder;
        code.validate(net)?;
        Ok(code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Channel;

    #[test]
    fn layout_sizes() {
        let net = Network::point_to_point(&Channel::bsc(0.1));
        let l = CodeLayout::new(&net, 3, &[4, 1], &[0, 1], 2).unwrap();
        // schedule (0,1,1)
        assert_eq!(l.encoder_len(0, 0).unwrap(), 4);
        assert_eq!(l.encoder_len(0, 2).unwrap(), 8);
        assert_eq!(l.encoder_len(1, 2).unwrap(), 4 * 2);
        assert_eq!(l.decoder_len(1).unwrap(), 8 * 4);
        assert_eq!(l.pipe_state_count(0).unwrap(), 4 * 2);
        let code = l.zero_code().unwrap();
        code.validate(&net).unwrap();
    }

    #[test]
    fn rejects_out_of_alphabet() {
        let net = Network::point_to_point(&Channel::bsc(0.1));
        assert!(Code::block_point_to_point(&net, &[vec![0], vec![2]], vec![0, 1]).is_err());
        assert!(Code::block_point_to_point(&net, &[vec![0], vec![1]], vec![0, 2]).is_err());
        assert!(Code::block_point_to_point(&net, &[vec![0], vec![1]], vec![0, 1]).is_ok());
    }
}
