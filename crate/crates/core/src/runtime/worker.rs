use std::io::{self, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};

use crate::error::Result;

use super::task::execute_task;
use super::wire::{self, code, FrameType, MAGIC, MAX_PAYLOAD, PROTOCOL_VERSION};

fn send_error<S: Write>(s: &mut S, code: u16, message: &str) -> io::Result<()> {
    wire::write_frame(s, FrameType::Error, &wire::encode_error(code, message))
}

/// Serves one coordinator connection until a shutdown frame or end of
/// stream. Malformed frames get an error frame and the session continues.
pub fn serve_connection<S: Read + Write>(stream: &mut S) -> io::Result<()> {
    let mut greeted = false;
    loop {
        let Some(h) = wire::read_header(stream)? else {
            return Ok(());
        };
        if h.magic != MAGIC {
            if h.payload_len <= MAX_PAYLOAD {
                io::copy(
                    &mut Read::by_ref(stream).take(u64::from(h.payload_len)),
                    &mut io::sink(),
                )?;
            }
            send_error(stream, code::BAD_MAGIC, "bad magic")?;
            continue;
        }
        if h.payload_len > MAX_PAYLOAD {
            send_error(stream, code::OVERSIZED, "frame exceeds 256 MiB")?;
            continue;
        }
        let payload = wire::read_payload(stream, h.payload_len)?;
        let Some(ft) = FrameType::from_u8(h.frame_type) else {
            send_error(
                stream,
                code::MALFORMED,
                &format!("unknown frame type {}", h.frame_type),
            )?;
            continue;
        };
        match ft {
            FrameType::Hello => match wire::decode_hello(&payload) {
                Ok(PROTOCOL_VERSION) => {
                    greeted = true;
                    wire::write_frame(
                        stream,
                        FrameType::Hello,
                        &wire::encode_hello(PROTOCOL_VERSION),
                    )?;
                }
                Ok(v) => send_error(
                    stream,
                    code::VERSION_MISMATCH,
                    &format!("protocol version {v} unsupported, expected {PROTOCOL_VERSION}"),
                )?,
                Err(e) => send_error(stream, code::MALFORMED, &e.to_string())?,
            },
            FrameType::Task if !greeted => {
                send_error(stream, code::UNEXPECTED_FRAME, "task before hello")?
            }
            FrameType::Task => match wire::decode_task(&payload) {
                Err(e) => send_error(stream, code::MALFORMED, &e.to_string())?,
                Ok(task) => match execute_task(&task) {
                    Ok(reply) => {
                        wire::write_frame(stream, FrameType::Reply, &wire::encode_reply(&reply))?
                    }
                    Err(e) => send_error(stream, code::TASK_FAILED, &e.to_string())?,
                },
            },
            FrameType::Shutdown => return Ok(()),
            FrameType::Reply | FrameType::Error => send_error(
                stream,
                code::UNEXPECTED_FRAME,
                "workers do not accept this frame type",
            )?,
        }
    }
}

/// TCP worker; each accepted connection is served on its own thread.
pub struct Worker {
    listener: TcpListener,
}

impl Worker {
    pub fn bind<A: ToSocketAddrs>(addr: A) -> Result<Self> {
        Ok(Self {
            listener: TcpListener::bind(addr)?,
        })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        Ok(self.listener.local_addr()?)
    }

    /// Accepts connections forever.
    pub fn serve(self) -> Result<()> {
        self.serve_until(&AtomicBool::new(false))
    }

    fn serve_until(&self, stop: &AtomicBool) -> Result<()> {
        for conn in self.listener.incoming() {
            if stop.load(Ordering::SeqCst) {
                break;
            }
            let Ok(mut conn) = conn else { continue };
            let _ = conn.set_nodelay(true);
            thread::spawn(move || {
                let _ = serve_connection(&mut conn);
            });
        }
        Ok(())
    }

    /// Serves on a background thread until the handle is stopped or dropped.
    pub fn spawn(self) -> Result<WorkerHandle> {
        let addr = self.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = Arc::clone(&stop);
        let join = thread::spawn(move || {
            let _ = self.serve_until(&flag);
        });
        Ok(WorkerHandle {
            addr,
            stop,
            join: Some(join),
        })
    }
}

pub struct WorkerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    join: Option<JoinHandle<()>>,
}

impl WorkerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting connections. Sessions already open run to completion.
    pub fn stop(mut self) {
        self.shutdown();
    }

    fn shutdown(&mut self) {
        if let Some(join) = self.join.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect(self.addr);
            let _ = join.join();
        }
    }
}

impl Drop for WorkerHandle {
    fn drop(&mut self) {
        self.shutdown();
    }
}
