use crate::field::{self, Goldilocks, WideProduct};
use crate::merkle::{Leaf, MerkleBuilder};
use crate::poseidon::lanes::{LanePermuter, PackedRows};
use crate::poseidon::{self, Backend, Digest, PoseidonConstants, PoseidonState, WIDTH};
use crate::rng::ElementRng;
use crate::vecbackend::{LaneOps, LaneWidth, MulMode, OpCounters, OpSink};

use super::{BenchConfig, BenchError, BenchTarget, FieldOp};

/// Inputs and output buffer of one prepared case.
pub(crate) struct Case<'c> {
    consts: &'c PoseidonConstants,
    backend: Backend,
    mul_mode: MulMode,
    threads: usize,
    work: Work,
}

#[allow(clippy::large_enum_variant)]
enum Work {
    Field {
        op: FieldOp,
        a: Vec<u64>,
        b: Vec<u64>,
        out: Vec<u64>,
    },
    Matrix {
        op: FieldOp,
        states: Vec<PoseidonState>,
        rows: [[Goldilocks; WIDTH]; 4],
        rows8: [[u8; WIDTH]; 4],
        out: Vec<[Goldilocks; 4]>,
    },
    Poseidon {
        states: Vec<PoseidonState>,
        out: Vec<PoseidonState>,
    },
    Merkle {
        leaves: Vec<Leaf>,
        root: Digest,
    },
}

impl<'c> Case<'c> {
    pub fn prepare(config: &BenchConfig, consts: &'c PoseidonConstants) -> Self {
        let mut rng = ElementRng::new(config.seed);
        let n = config.effective_size();
        let work = match config.target {
            BenchTarget::Field(op) if op.is_matrix() => {
                let sparse = matches!(op, FieldOp::Spmv4x12 | FieldOp::Spmv4x12U8);
                // sparse rows are banded: only the first four columns are nonzero
                let rows: [[Goldilocks; WIDTH]; 4] = std::array::from_fn(|_| {
                    std::array::from_fn(|c| {
                        let e = rng.element();
                        if sparse && c >= 4 {
                            Goldilocks::ZERO
                        } else {
                            e
                        }
                    })
                });
                let rows8 = rows.map(|r| r.map(|e| (e.value() >> 56) as u8));
                Work::Matrix {
                    op,
                    states: rng.states(n),
                    rows,
                    rows8,
                    out: vec![[Goldilocks::ZERO; 4]; n],
                }
            }
            BenchTarget::Field(op) => {
                // pad to a whole number of eight-lane registers
                let n = n.next_multiple_of(8);
                let (a, b): (Vec<u64>, Vec<u64>) = match op {
                    FieldOp::Reduce128 => (0..n).map(|_| (rng.next_u64(), rng.next_u64())).unzip(),
                    FieldOp::Mult72 => (0..n).map(|_| (rng.element().value(), rng.next_u8() as u64)).unzip(),
                    _ => (0..n).map(|_| (rng.element().value(), rng.element().value())).unzip(),
                };
                Work::Field {
                    op,
                    a,
                    b,
                    out: vec![0; n],
                }
            }
            BenchTarget::Poseidon => Work::Poseidon {
                states: rng.states(n),
                out: vec![[Goldilocks::ZERO; WIDTH]; n],
            },
            BenchTarget::Merkle => Work::Merkle {
                leaves: rng.leaves(n),
                root: Digest::default(),
            },
            BenchTarget::Table1 => unreachable!("expanded before preparation"),
        };
        Self {
            consts,
            backend: config.backend,
            mul_mode: config.mul_mode,
            threads: config.threads,
            work,
        }
    }

    /// Operations (or hashes, for Poseidon and Merkle) per run.
    pub fn work_items(&self) -> usize {
        match &self.work {
            Work::Field { out, .. } => out.len(),
            Work::Matrix { out, .. } => out.len(),
            Work::Poseidon { out, .. } => out.len(),
            Work::Merkle { leaves, .. } => 2 * leaves.len() - 1,
        }
    }

    /// Executes once, leaving results in the output buffer.
    pub fn execute(&mut self) -> Result<Option<OpCounters>, BenchError> {
        let consts = self.consts;
        let mode = self.mul_mode;
        match &mut self.work {
            Work::Field { op, a, b, out } => {
                if self.backend == Backend::Scalar {
                    scalar_field(*op, a, b, out);
                    return Ok(None);
                }
                let mut job = FieldJob {
                    op: *op,
                    a,
                    b,
                    out,
                    mode,
                };
                Ok(dispatch(self.backend, &mut job))
            }
            Work::Matrix {
                op,
                states,
                rows,
                rows8,
                out,
            } => {
                if self.backend == Backend::Scalar {
                    scalar_matrix(*op, states, rows, rows8, out);
                    return Ok(None);
                }
                let mut job = MatrixJob {
                    op: *op,
                    states,
                    rows,
                    rows8,
                    out,
                    consts,
                    mode,
                };
                Ok(dispatch(self.backend, &mut job))
            }
            Work::Poseidon { states, out } => {
                out.copy_from_slice(states);
                let mut p = self.backend.permuter_with_mode(consts, mode);
                p.permute_many(out);
                Ok(p.counters())
            }
            Work::Merkle { leaves, root } => {
                let (tree, counters) = MerkleBuilder::new()
                    .threads(self.threads)
                    .backend(self.backend)
                    .mul_mode(mode)
                    .build_counted(leaves, consts)?;
                *root = tree.root();
                Ok(counters)
            }
        }
    }

    pub fn fingerprint(&self) -> String {
        match &self.work {
            Work::Field { out, .. } => fnv(out.iter().copied()),
            Work::Matrix { out, .. } => fnv(out.iter().flatten().map(|e| e.value())),
            Work::Poseidon { out, .. } => fnv(out.iter().flatten().map(|e| e.value())),
            Work::Merkle { root, .. } => root.to_hex(),
        }
    }
}

/// FNV-1a over the little-endian bytes of every word, as 16 hex chars.
fn fnv(words: impl Iterator<Item = u64>) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for w in words {
        for byte in w.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

fn scalar_field(op: FieldOp, a: &[u64], b: &[u64], out: &mut [u64]) {
    let g = Goldilocks::from_canonical;
    for ((o, &x), &y) in out.iter_mut().zip(a).zip(b) {
        *o = match op {
            FieldOp::Add => field::add(g(x), g(y)),
            FieldOp::Sub => field::sub(g(x), g(y)),
            FieldOp::Reduce128 => field::reduce_128(WideProduct::new(x, y)),
            FieldOp::Square128 => field::square(g(x)),
            FieldOp::Mult128 => field::mul(g(x), g(y)),
            FieldOp::Mult72 => field::mult_72(g(x), y as u8),
            _ => unreachable!("matrix ops run elsewhere"),
        }
        .value();
    }
}

fn scalar_matrix(
    op: FieldOp,
    states: &[PoseidonState],
    rows: &[[Goldilocks; WIDTH]; 4],
    rows8: &[[u8; WIDTH]; 4],
    out: &mut [[Goldilocks; 4]],
) {
    for (o, s) in out.iter_mut().zip(states) {
        *o = match op {
            FieldOp::Spmv4x12 => poseidon::spmv_4x12(s, rows),
            FieldOp::Spmv4x12U8 => poseidon::spmv_4x12_8(s, rows8),
            FieldOp::Mmult4x12 => poseidon::mmult_4x12(s, rows),
            FieldOp::Mmult4x12U8 => poseidon::mmult_4x12_8(s, rows8),
            _ => unreachable!("element ops run elsewhere"),
        };
    }
}

/// Work that runs on a lane engine of any width and sink.
trait LaneJob {
    fn run<const W: usize, S: OpSink>(&mut self, sink: S) -> S;
}

fn dispatch(backend: Backend, job: &mut impl LaneJob) -> Option<OpCounters> {
    match backend {
        Backend::Scalar => unreachable!("scalar path handled by the caller"),
        Backend::Lanes(LaneWidth::W2) => {
            job.run::<2, ()>(());
            None
        }
        Backend::Lanes(LaneWidth::W4) => {
            job.run::<4, ()>(());
            None
        }
        Backend::Lanes(LaneWidth::W8) => {
            job.run::<8, ()>(());
            None
        }
        Backend::Counting(LaneWidth::W2) => Some(job.run::<2, _>(OpCounters::default())),
        Backend::Counting(LaneWidth::W4) => Some(job.run::<4, _>(OpCounters::default())),
        Backend::Counting(LaneWidth::W8) => Some(job.run::<8, _>(OpCounters::default())),
    }
}

struct FieldJob<'a> {
    op: FieldOp,
    a: &'a [u64],
    b: &'a [u64],
    out: &'a mut [u64],
    mode: MulMode,
}

impl LaneJob for FieldJob<'_> {
    fn run<const W: usize, S: OpSink>(&mut self, sink: S) -> S {
        let mut ops = LaneOps::<W, S>::new(sink, self.mode);
        for i in (0..self.out.len()).step_by(W) {
            let x = ops.load(&self.a[i..]);
            let y = ops.load(&self.b[i..]);
            let r = match self.op {
                FieldOp::Add => ops.add(x, y),
                FieldOp::Sub => ops.sub(x, y),
                FieldOp::Reduce128 => ops.reduce_128(x, y),
                FieldOp::Square128 => ops.square(x),
                FieldOp::Mult128 => ops.mul(x, y),
                FieldOp::Mult72 => ops.mul_u8(x, y),
                _ => unreachable!("matrix ops run elsewhere"),
            };
            ops.store(r, &mut self.out[i..i + W]);
        }
        ops.into_sink()
    }
}

struct MatrixJob<'a> {
    op: FieldOp,
    states: &'a [PoseidonState],
    rows: &'a [[Goldilocks; WIDTH]; 4],
    rows8: &'a [[u8; WIDTH]; 4],
    out: &'a mut [[Goldilocks; 4]],
    consts: &'a PoseidonConstants,
    mode: MulMode,
}

impl LaneJob for MatrixJob<'_> {
    fn run<const W: usize, S: OpSink>(&mut self, sink: S) -> S {
        let (packed, sparse) = match self.op {
            FieldOp::Spmv4x12 => (PackedRows::<W>::new(self.rows), true),
            FieldOp::Spmv4x12U8 => (PackedRows::new_u8(self.rows8), true),
            FieldOp::Mmult4x12 => (PackedRows::new(self.rows), false),
            FieldOp::Mmult4x12U8 => (PackedRows::new_u8(self.rows8), false),
            _ => unreachable!("element ops run elsewhere"),
        };
        let mut engine = LanePermuter::<W, S>::new(self.consts, sink, self.mode);
        let batch = LanePermuter::<W, S>::BATCH;
        for (states, out) in self.states.chunks(batch).zip(self.out.chunks_mut(batch)) {
            engine.matrix_4x12_into(states, &packed, sparse, out);
        }
        engine.into_sink()
    }
}
