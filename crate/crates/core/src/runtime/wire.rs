//! Wire protocol v1.
//!
//! Every frame is `"AVM1" | u8 frame_type | u32 payload_length | payload`,
//! all integers little-endian. Frame types: 0 hello, 1 task, 2 reply,
//! 3 error, 4 shutdown.
//!
//! Task payload:
//!
//! ```text
//! u8 model_kind   u32 d   f64 λ   u8 solver_method   f64 grad_tol
//! u32 max_iter    f64 c   f64 sgd_λ   f64 R (NaN = unconstrained)
//! u8 has_subsample   f64 r   u64 seed   u8 data_mode (0 recipe, 1 inline)
//! recipe: u8 model  u8 feature_style  u64 truth_seed  u64 range_start  u64 range_len
//! inline: u64 count, per sample: u32 nnz, nnz × (u32 idx, f64 val), f64 target
//! u8 sgd_schedule (0 c/(λt), 1 d/(10(d+t)))   u32 stage1_iters (u32::MAX = default)
//! ```
//!
//! Reply payload: `u8 has_θ₂, u32 d, d × f64 θ₁, [d × f64 θ₂], u32 iterations,
//! f64 final_grad_norm`. Error payload: `u16 code, u16 message_len, message`.

use std::io::{self, Read, Write};

use crate::aggregate::SubsampleSpec;
use crate::dataset::{Dataset, Features, ParamVector, Sample};
use crate::error::{Error, Result};
use crate::gen::{FeatureStyle, GenModel, GenSpec, SPARSE_NNZ};
use crate::loss::{LossKind, LossModel};
use crate::solver::{Radius, SgdConfig, SolverConfig, SolverMethod, StepSchedule};

use super::task::{ShardData, WorkerReply, WorkerTask};

pub const MAGIC: [u8; 4] = *b"AVM1";
pub const PROTOCOL_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 9;
/// Largest accepted payload (256 MiB).
pub const MAX_PAYLOAD: u32 = 256 * 1024 * 1024;
/// Largest model dimension accepted from the wire.
pub const MAX_WIRE_DIM: u32 = 1 << 20;
/// Largest recipe range accepted from the wire.
pub const MAX_WIRE_RANGE: u64 = 1 << 28;

pub mod code {
    pub const BAD_MAGIC: u16 = 1;
    pub const OVERSIZED: u16 = 2;
    pub const MALFORMED: u16 = 3;
    pub const VERSION_MISMATCH: u16 = 4;
    pub const TASK_FAILED: u16 = 5;
    pub const UNEXPECTED_FRAME: u16 = 6;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum FrameType {
    Hello = 0,
    Task = 1,
    Reply = 2,
    Error = 3,
    Shutdown = 4,
}

impl FrameType {
    pub fn from_u8(b: u8) -> Option<Self> {
        Some(match b {
            0 => FrameType::Hello,
            1 => FrameType::Task,
            2 => FrameType::Reply,
            3 => FrameType::Error,
            4 => FrameType::Shutdown,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameHeader {
    pub magic: [u8; 4],
    pub frame_type: u8,
    pub payload_len: u32,
}

impl FrameHeader {
    pub fn parse(buf: &[u8; HEADER_LEN]) -> Self {
        Self {
            magic: [buf[0], buf[1], buf[2], buf[3]],
            frame_type: buf[4],
            payload_len: u32::from_le_bytes([buf[5], buf[6], buf[7], buf[8]]),
        }
    }
}

pub fn encode_frame(frame_type: FrameType, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    out.extend_from_slice(&MAGIC);
    out.push(frame_type as u8);
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(payload);
    out
}

pub fn write_frame<W: Write>(w: &mut W, frame_type: FrameType, payload: &[u8]) -> io::Result<()> {
    w.write_all(&encode_frame(frame_type, payload))?;
    w.flush()
}

/// Reads a full header; `Ok(None)` on clean end of stream.
pub fn read_header<R: Read>(r: &mut R) -> io::Result<Option<FrameHeader>> {
    let mut buf = [0u8; HEADER_LEN];
    let mut filled = 0;
    while filled < HEADER_LEN {
        match r.read(&mut buf[filled..]) {
            Ok(0) if filled == 0 => return Ok(None),
            Ok(0) => return Err(io::ErrorKind::UnexpectedEof.into()),
            Ok(k) => filled += k,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(Some(FrameHeader::parse(&buf)))
}

pub fn read_payload<R: Read>(r: &mut R, len: u32) -> io::Result<Vec<u8>> {
    let mut payload = vec![0u8; len as usize];
    r.read_exact(&mut payload)?;
    Ok(payload)
}

/// Reads one well-formed frame, rejecting bad magic, unknown types and
/// oversized payloads.
pub fn read_frame<R: Read>(r: &mut R) -> Result<Option<(FrameType, Vec<u8>)>> {
    let Some(h) = read_header(r)? else {
        return Ok(None);
    };
    if h.magic != MAGIC {
        return Err(Error::Protocol {
            code: code::BAD_MAGIC,
            message: format!("bad magic {:02x?}", h.magic),
        });
    }
    if h.payload_len > MAX_PAYLOAD {
        return Err(Error::Protocol {
            code: code::OVERSIZED,
            message: format!("payload of {} bytes exceeds limit", h.payload_len),
        });
    }
    let ft = FrameType::from_u8(h.frame_type).ok_or_else(|| Error::Protocol {
        code: code::MALFORMED,
        message: format!("unknown frame type {}", h.frame_type),
    })?;
    Ok(Some((ft, read_payload(r, h.payload_len)?)))
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn malformed(msg: impl Into<String>) -> Error {
    Error::Protocol {
        code: code::MALFORMED,
        message: msg.into(),
    }
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(malformed(format!(
                "truncated payload: need {n} bytes at offset {}, have {}",
                self.pos,
                self.remaining()
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn finish(&self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(malformed(format!("{} trailing bytes", self.remaining())));
        }
        Ok(())
    }
}

pub fn encode_hello(version: u16) -> Vec<u8> {
    version.to_le_bytes().to_vec()
}

pub fn decode_hello(payload: &[u8]) -> Result<u16> {
    let mut r = Reader::new(payload);
    let v = r.u16()?;
    r.finish()?;
    Ok(v)
}

pub fn encode_error(code: u16, message: &str) -> Vec<u8> {
    let mut msg = message.as_bytes();
    if msg.len() > u16::MAX as usize {
        let mut cut = u16::MAX as usize;
        while !message.is_char_boundary(cut) {
            cut -= 1;
        }
        msg = &msg[..cut];
    }
    let mut w = Writer(Vec::with_capacity(4 + msg.len()));
    w.u16(code);
    w.u16(msg.len() as u16);
    w.0.extend_from_slice(msg);
    w.0
}

pub fn decode_error(payload: &[u8]) -> Result<(u16, String)> {
    let mut r = Reader::new(payload);
    let code = r.u16()?;
    let len = r.u16()? as usize;
    let msg = String::from_utf8(r.take(len)?.to_vec())
        .map_err(|e| malformed(format!("error message: {e}")))?;
    r.finish()?;
    Ok((code, msg))
}

fn model_code(m: GenModel) -> u8 {
    match m {
        GenModel::Normal => 0,
        GenModel::Cubic => 1,
        GenModel::Heteroskedastic => 2,
        GenModel::BernoulliPathological => 3,
        GenModel::SparseClick => 4,
    }
}

fn model_from_code(b: u8) -> Result<GenModel> {
    Ok(match b {
        0 => GenModel::Normal,
        1 => GenModel::Cubic,
        2 => GenModel::Heteroskedastic,
        3 => GenModel::BernoulliPathological,
        4 => GenModel::SparseClick,
        _ => return Err(malformed(format!("unknown generator model {b}"))),
    })
}

pub fn encode_task(task: &WorkerTask) -> Result<Vec<u8>> {
    let mut w = Writer(Vec::with_capacity(128));
    let (kind, lambda) = match task.model.kind() {
        LossKind::LeastSquares => (0u8, 0.0),
        LossKind::RidgeLogistic { lambda } => (1, lambda),
        LossKind::Pathological => (2, 0.0),
    };
    w.u8(kind);
    w.u32(task.model.dim() as u32);
    w.f64(lambda);
    let s = &task.solver;
    if s.theta_init.is_some() {
        return Err(Error::invalid(
            "a custom starting point cannot be sent over the wire",
        ));
    }
    w.u8(match s.method {
        SolverMethod::ClosedFormLs => 0,
        SolverMethod::Newton => 1,
        SolverMethod::Sgd => 2,
        SolverMethod::TwoStage => 3,
    });
    w.f64(s.grad_tol);
    w.u32(u32::try_from(s.max_iter).map_err(|_| Error::invalid("max_iter exceeds u32"))?);
    w.f64(s.sgd.c);
    w.f64(s.sgd.lambda);
    w.f64(
        s.sgd
            .resolved_radius(&vec![0.0; task.model.dim()])
            .unwrap_or(f64::NAN),
    );
    match &task.subsample {
        Some(sub) => {
            w.u8(1);
            w.f64(sub.ratio());
        }
        None => {
            w.u8(0);
            w.f64(0.0);
        }
    }
    w.u64(task.seed);
    match &task.shard {
        ShardData::Recipe {
            spec,
            range_start,
            range_len,
        } => {
            if spec.zero_noise {
                return Err(Error::invalid(
                    "the zero-noise hook cannot be sent over the wire",
                ));
            }
            if spec.model == GenModel::SparseClick && spec.nnz_per_row != SPARSE_NNZ {
                return Err(Error::invalid(format!(
                    "click recipes on the wire use {SPARSE_NNZ} ones per row; ship the data inline"
                )));
            }
            w.u8(0);
            w.u8(model_code(spec.model));
            w.u8(match spec.feature_style {
                FeatureStyle::Sparse5 => 0,
                FeatureStyle::DenseGaussian => 1,
            });
            w.u64(spec.seed);
            w.u64(*range_start);
            w.u64(*range_len);
        }
        ShardData::Inline(data) => {
            w.u8(1);
            w.u64(data.len() as u64);
            for s in data {
                let nz = s.features.nonzeros();
                w.u32(nz.len() as u32);
                for (i, v) in nz {
                    w.u32(i);
                    w.f64(v);
                }
                w.f64(s.target);
            }
        }
    }
    w.u8(match s.sgd.schedule {
        StepSchedule::COverLambdaT => 0,
        StepSchedule::DOver10DPlusT => 1,
    });
    w.u32(match s.stage1_iters {
        Some(k) => u32::try_from(k)
            .ok()
            .filter(|&k| k != u32::MAX)
            .ok_or_else(|| Error::invalid("stage-1 iteration count too large"))?,
        None => u32::MAX,
    });
    if w.0.len() > MAX_PAYLOAD as usize {
        return Err(Error::invalid("task payload exceeds the frame limit"));
    }
    Ok(w.0)
}

pub fn decode_task(payload: &[u8]) -> Result<WorkerTask> {
    let mut r = Reader::new(payload);
    let kind = r.u8()?;
    let d = r.u32()?;
    if d == 0 || d > MAX_WIRE_DIM {
        return Err(malformed(format!("dimension {d} out of range")));
    }
    let d = d as usize;
    let lambda = r.f64()?;
    let kind = match kind {
        0 => LossKind::LeastSquares,
        1 => LossKind::RidgeLogistic { lambda },
        2 => LossKind::Pathological,
        k => return Err(malformed(format!("unknown model kind {k}"))),
    };
    let model = LossModel::new(kind, d).map_err(|e| malformed(e.to_string()))?;
    let method = match r.u8()? {
        0 => SolverMethod::ClosedFormLs,
        1 => SolverMethod::Newton,
        2 => SolverMethod::Sgd,
        3 => SolverMethod::TwoStage,
        k => return Err(malformed(format!("unknown solver method {k}"))),
    };
    let grad_tol = r.f64()?;
    let max_iter = r.u32()? as usize;
    let c = r.f64()?;
    let sgd_lambda = r.f64()?;
    let radius = r.f64()?;
    let radius = if radius.is_nan() {
        Radius::Unconstrained
    } else {
        Radius::Ball(radius)
    };
    let has_sub = r.u8()?;
    let ratio = r.f64()?;
    let seed = r.u64()?;
    let subsample = match has_sub {
        0 => None,
        1 => Some(
            SubsampleSpec::new(ratio, super::task::subsample_seed(seed))
                .map_err(|e| malformed(e.to_string()))?,
        ),
        k => return Err(malformed(format!("bad has_subsample flag {k}"))),
    };
    let shard = match r.u8()? {
        0 => {
            let gm = model_from_code(r.u8()?)?;
            let style = match r.u8()? {
                0 => FeatureStyle::Sparse5,
                1 => FeatureStyle::DenseGaussian,
                k => return Err(malformed(format!("unknown feature style {k}"))),
            };
            let truth_seed = r.u64()?;
            let range_start = r.u64()?;
            let range_len = r.u64()?;
            if range_len == 0
                || range_len > MAX_WIRE_RANGE
                || range_start.checked_add(range_len).is_none()
            {
                return Err(malformed(format!(
                    "recipe range length {range_len} out of range"
                )));
            }
            let spec =
                GenSpec::new(gm, d, style, truth_seed).map_err(|e| malformed(e.to_string()))?;
            ShardData::Recipe {
                spec,
                range_start,
                range_len,
            }
        }
        1 => {
            let count = r.u64()?;
            // every sample takes at least 12 bytes
            if count > (r.remaining() / 12) as u64 {
                return Err(malformed(format!("sample count {count} exceeds payload")));
            }
            let mut samples = Vec::with_capacity(count as usize);
            for _ in 0..count {
                let nnz = r.u32()? as usize;
                if nnz > r.remaining() / 12 {
                    return Err(malformed(format!("nnz {nnz} exceeds payload")));
                }
                let mut pairs = Vec::with_capacity(nnz);
                for _ in 0..nnz {
                    let i = r.u32()?;
                    let v = r.f64()?;
                    pairs.push((i, v));
                }
                let target = r.f64()?;
                let features =
                    Features::from_pairs(d, &pairs).map_err(|e| malformed(e.to_string()))?;
                samples.push(Sample { features, target });
            }
            ShardData::Inline(Dataset::new(d, samples).map_err(|e| malformed(e.to_string()))?)
        }
        k => return Err(malformed(format!("unknown data mode {k}"))),
    };
    let schedule = match r.u8()? {
        0 => StepSchedule::COverLambdaT,
        1 => StepSchedule::DOver10DPlusT,
        k => return Err(malformed(format!("unknown SGD schedule {k}"))),
    };
    let stage1 = r.u32()?;
    r.finish()?;
    let solver = SolverConfig {
        method,
        grad_tol,
        max_iter,
        sgd: SgdConfig {
            c,
            lambda: sgd_lambda,
            radius,
            schedule,
        },
        stage1_iters: (stage1 != u32::MAX).then_some(stage1 as usize),
        theta_init: None,
    };
    solver.validate().map_err(|e| malformed(e.to_string()))?;
    Ok(WorkerTask {
        shard,
        model,
        solver,
        subsample,
        seed,
    })
}

pub fn encode_reply(reply: &WorkerReply) -> Vec<u8> {
    let d = reply.theta1.len();
    let mut w = Writer(Vec::with_capacity(17 + 16 * d));
    w.u8(u8::from(reply.theta2.is_some()));
    w.u32(d as u32);
    for v in reply.theta1.iter() {
        w.f64(*v);
    }
    if let Some(t2) = &reply.theta2 {
        for v in t2.iter() {
            w.f64(*v);
        }
    }
    w.u32(reply.iterations);
    w.f64(reply.final_grad_norm);
    w.0
}

pub fn decode_reply(payload: &[u8]) -> Result<WorkerReply> {
    let mut r = Reader::new(payload);
    let has2 = match r.u8()? {
        0 => false,
        1 => true,
        k => return Err(malformed(format!("bad has_theta2 flag {k}"))),
    };
    let d = r.u32()? as usize;
    let levels = if has2 { 2 } else { 1 };
    if d.saturating_mul(8 * levels) > r.remaining() {
        return Err(malformed(format!("dimension {d} exceeds payload")));
    }
    let read_vec = |r: &mut Reader| -> Result<ParamVector> {
        let v = (0..d).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
        ParamVector::new(v).map_err(|e| malformed(e.to_string()))
    };
    let theta1 = read_vec(&mut r)?;
    let theta2 = if has2 { Some(read_vec(&mut r)?) } else { None };
    let iterations = r.u32()?;
    let final_grad_norm = r.f64()?;
    r.finish()?;
    Ok(WorkerReply {
        theta1,
        theta2,
        iterations,
        final_grad_norm,
    })
}
