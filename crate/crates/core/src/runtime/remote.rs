use std::net::{TcpStream, ToSocketAddrs};
use std::thread;
use std::time::Duration;

use crate::error::{Error, Result};

use super::plan::ShardPlan;
use super::task::{TaskTemplate, WorkerReply};
use super::wire::{self, code, FrameType, PROTOCOL_VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FailurePolicy {
    /// Any failed shard fails the run.
    #[default]
    Strict,
    /// Failed shards are dropped and reported; the rest are kept.
    Lenient,
}

#[derive(Debug, Clone)]
pub struct RemoteOptions {
    pub timeout: Duration,
    pub policy: FailurePolicy,
}

impl Default for RemoteOptions {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(300),
            policy: FailurePolicy::Strict,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemoteOutcome {
    /// `(shard, reply)` for every surviving shard, in shard order.
    pub replies: Vec<(usize, WorkerReply)>,
    pub failed: Vec<usize>,
}

impl RemoteOutcome {
    pub fn surviving(&self) -> Vec<WorkerReply> {
        self.replies.iter().map(|(_, r)| r.clone()).collect()
    }
}

fn connect(endpoint: &str, timeout: Duration) -> Result<TcpStream> {
    let mut last = None;
    for addr in endpoint.to_socket_addrs()? {
        match TcpStream::connect_timeout(&addr, timeout) {
            Ok(s) => {
                s.set_read_timeout(Some(timeout))?;
                s.set_write_timeout(Some(timeout))?;
                let _ = s.set_nodelay(true);
                return Ok(s);
            }
            Err(e) => last = Some(e),
        }
    }
    Err(last
        .map(Error::from)
        .unwrap_or_else(|| Error::invalid(format!("{endpoint} resolves to no address"))))
}

fn expect_frame(stream: &mut TcpStream, want: FrameType) -> Result<Vec<u8>> {
    match wire::read_frame(stream)? {
        Some((ft, p)) if ft == want => Ok(p),
        Some((FrameType::Error, p)) => {
            let (code, message) = wire::decode_error(&p)?;
            Err(Error::Protocol { code, message })
        }
        Some((ft, _)) => Err(Error::Protocol {
            code: code::UNEXPECTED_FRAME,
            message: format!("expected {want:?} frame, got {ft:?}"),
        }),
        None => Err(Error::Protocol {
            code: code::UNEXPECTED_FRAME,
            message: "connection closed".into(),
        }),
    }
}

fn handshake(stream: &mut TcpStream, endpoint: &str) -> Result<()> {
    wire::write_frame(
        stream,
        FrameType::Hello,
        &wire::encode_hello(PROTOCOL_VERSION),
    )?;
    let v = match expect_frame(stream, FrameType::Hello) {
        Ok(p) => wire::decode_hello(&p)?,
        Err(Error::Protocol {
            code: code::VERSION_MISMATCH,
            message,
        }) => return Err(Error::Handshake(format!("{endpoint}: {message}"))),
        Err(e) => return Err(e),
    };
    if v != PROTOCOL_VERSION {
        return Err(Error::Handshake(format!(
            "{endpoint} speaks protocol {v}, expected {PROTOCOL_VERSION}"
        )));
    }
    Ok(())
}

enum EndpointResult {
    Done(Vec<(usize, Result<WorkerReply>)>),
    Handshake(Error),
}

fn run_endpoint(
    endpoint: &str,
    shards: &[usize],
    plan: &ShardPlan,
    template: &TaskTemplate,
    timeout: Duration,
) -> EndpointResult {
    let mut stream = match connect(endpoint, timeout) {
        Ok(s) => s,
        Err(e) => {
            let msg = format!("{endpoint}: {e}");
            return EndpointResult::Done(
                shards
                    .iter()
                    .map(|&i| (i, Err(Error::invalid(msg.clone()))))
                    .collect(),
            );
        }
    };
    match handshake(&mut stream, endpoint) {
        Ok(()) => {}
        Err(e @ Error::Handshake(_)) => return EndpointResult::Handshake(e),
        Err(e) => {
            let msg = format!("{endpoint}: {e}");
            return EndpointResult::Done(
                shards
                    .iter()
                    .map(|&i| (i, Err(Error::invalid(msg.clone()))))
                    .collect(),
            );
        }
    }
    let mut out = Vec::with_capacity(shards.len());
    let mut broken: Option<String> = None;
    for &i in shards {
        if let Some(msg) = &broken {
            out.push((i, Err(Error::invalid(msg.clone()))));
            continue;
        }
        let res = template
            .task_for(plan, i, false)
            .and_then(|t| wire::encode_task(&t))
            .and_then(|payload| {
                wire::write_frame(&mut stream, FrameType::Task, &payload)?;
                let reply = wire::decode_reply(&expect_frame(&mut stream, FrameType::Reply)?)?;
                if reply.theta1.len() != template.model.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: template.model.dim(),
                        actual: reply.theta1.len(),
                    });
                }
                Ok(reply)
            });
        if let Err(e) = &res {
            // a worker-side task error leaves the session usable; anything else does not
            if !matches!(
                e,
                Error::Protocol {
                    code: code::TASK_FAILED,
                    ..
                }
            ) {
                broken = Some(format!("{endpoint}: {e}"));
            }
        }
        out.push((
            i,
            res.map_err(|e| e.context(format!("shard {i} on {endpoint}"))),
        ));
    }
    if broken.is_none() {
        let _ = wire::write_frame(&mut stream, FrameType::Shutdown, &[]);
    }
    EndpointResult::Done(out)
}

/// Runs the shards on remote workers, assigning shard `i` to
/// `endpoints[i % endpoints.len()]`. Each endpoint gets one connection that
/// carries a hello, one task per shard and a final shutdown. Synthetic
/// shards travel as recipes, loaded data travels inline.
pub fn run_remote(
    plan: &ShardPlan,
    template: &TaskTemplate,
    endpoints: &[String],
    opts: &RemoteOptions,
) -> Result<RemoteOutcome> {
    if endpoints.is_empty() {
        return Err(Error::invalid("run_remote needs at least one endpoint"));
    }
    let k = endpoints.len().min(plan.m());
    let assignment: Vec<Vec<usize>> = (0..k)
        .map(|e| (e..plan.m()).step_by(endpoints.len()).collect())
        .collect();
    let results: Vec<EndpointResult> = thread::scope(|scope| {
        let handles: Vec<_> = assignment
            .iter()
            .zip(endpoints)
            .map(|(shards, ep)| {
                scope.spawn(move || run_endpoint(ep, shards, plan, template, opts.timeout))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("endpoint thread panicked"))
            .collect()
    });
    let mut slots: Vec<Option<Result<WorkerReply>>> = (0..plan.m()).map(|_| None).collect();
    for r in results {
        match r {
            EndpointResult::Handshake(e) => return Err(e),
            EndpointResult::Done(v) => {
                for (i, res) in v {
                    slots[i] = Some(res);
                }
            }
        }
    }
    let mut replies = Vec::new();
    let mut failed = Vec::new();
    let mut first_error = None;
    for (i, slot) in slots.into_iter().enumerate() {
        match slot.expect("every shard is assigned") {
            Ok(r) => replies.push((i, r)),
            Err(e) => {
                failed.push(i);
                first_error.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_error {
        if opts.policy == FailurePolicy::Strict || replies.is_empty() {
            return Err(Error::ShardsFailed {
                shards: failed,
                detail: e.to_string(),
            });
        }
    }
    Ok(RemoteOutcome { replies, failed })
}
