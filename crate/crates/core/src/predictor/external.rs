use std::collections::VecDeque;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use super::protocol::{encode_rows, BridgeMessage, EngineMessage, PROTOCOL_VERSION};
use super::PredictorHandle;
use crate::error::{Error, Result};
use crate::feature_space::FeatureSpace;

const STDERR_TAIL: usize = 20;

#[derive(Debug, Clone)]
pub struct ExternalOptions {
    pub handshake_timeout: Duration,
    pub predict_timeout: Duration,
}

impl Default for ExternalOptions {
    fn default() -> Self {
        ExternalOptions {
            handshake_timeout: Duration::from_secs(10),
            predict_timeout: Duration::from_secs(60),
        }
    }
}

/// A child process serving predictions over stdio. Requests are serialized:
/// at most one is in flight per process.
pub struct ExternalModel {
    command: String,
    categorical: Vec<bool>,
    predict_timeout: Duration,
    inner: Mutex<Inner>,
}

struct Inner {
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    next_id: u64,
    stderr_tail: Arc<Mutex<VecDeque<String>>>,
    stderr_reader: Option<thread::JoinHandle<()>>,
}

impl Inner {
    fn send(&mut self, msg: &EngineMessage) -> Result<()> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| Error::Protocol("model process input is closed".into()))?;
        let mut line = serde_json::to_string(msg)?;
        line.push('\n');
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| Error::Protocol(format!("write to model process failed: {e}{}", self.tail())))
    }

    fn recv(&mut self, deadline: Instant, timeout: Duration) -> Result<BridgeMessage> {
        let remaining = deadline.saturating_duration_since(Instant::now());
        let line = match self.lines.recv_timeout(remaining) {
            Ok(line) => line,
            Err(RecvTimeoutError::Timeout) => return Err(Error::Timeout(timeout)),
            Err(RecvTimeoutError::Disconnected) => {
                let status = self
                    .child
                    .wait()
                    .map(|s| s.to_string())
                    .unwrap_or_else(|e| e.to_string());
                self.settle_stderr();
                return Err(Error::Protocol(format!(
                    "model process closed its output ({status}){}",
                    self.tail()
                )));
            }
        };
        serde_json::from_str(&line)
            .map_err(|e| Error::Protocol(format!("unexpected line from model process: {line:?} ({e})")))
    }

    /// Give the stderr reader a moment to drain after the child exited.
    fn settle_stderr(&mut self) {
        let deadline = Instant::now() + Duration::from_millis(500);
        while let Some(h) = &self.stderr_reader {
            if h.is_finished() || Instant::now() >= deadline {
                break;
            }
            thread::sleep(Duration::from_millis(5));
        }
    }

    fn tail(&self) -> String {
        let tail = self.stderr_tail.lock().map(|t| t.iter().cloned().collect::<Vec<_>>());
        match tail {
            Ok(t) if !t.is_empty() => format!("; stderr: {}", t.join(" | ")),
            _ => String::new(),
        }
    }
}

impl ExternalModel {
    pub fn command(&self) -> &str {
        &self.command
    }

    pub(crate) fn predict(&self, batch: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut inner = self
            .inner
            .lock()
            .map_err(|_| Error::Protocol("model process handle poisoned".into()))?;
        let id = inner.next_id;
        inner.next_id += 1;
        inner.send(&EngineMessage::Predict {
            id,
            x: encode_rows(batch, &self.categorical),
        })?;
        let deadline = Instant::now() + self.predict_timeout;
        loop {
            match inner.recv(deadline, self.predict_timeout)? {
                BridgeMessage::Result { id: got, y } if got == id => {
                    if y.len() != batch.len() {
                        return Err(Error::Protocol(format!(
                            "response {id} has {} rows for a request of {} rows",
                            y.len(),
                            batch.len()
                        )));
                    }
                    return Ok(y);
                }
                BridgeMessage::Error { id: None, message } => {
                    return Err(Error::Model { row: None, message });
                }
                BridgeMessage::Error { id: Some(got), message } if got == id => {
                    return Err(Error::Model { row: None, message });
                }
                // Late answers to requests that already timed out.
                BridgeMessage::Result { id: got, .. } | BridgeMessage::Error { id: Some(got), .. }
                    if got < id => {}
                BridgeMessage::Result { id: got, .. } | BridgeMessage::Error { id: Some(got), .. } => {
                    return Err(Error::Protocol(format!(
                        "response id {got} does not match request id {id}"
                    )));
                }
                BridgeMessage::Metadata { .. } => {
                    return Err(Error::Protocol("unexpected metadata message".into()));
                }
            }
        }
    }
}

impl Drop for ExternalModel {
    fn drop(&mut self) {
        let Ok(inner) = self.inner.get_mut() else { return };
        let _ = inner.send(&EngineMessage::Shutdown);
        inner.stdin = None;
        let deadline = Instant::now() + Duration::from_secs(2);
        while Instant::now() < deadline {
            match inner.child.try_wait() {
                Ok(Some(_)) => return,
                Ok(None) => thread::sleep(Duration::from_millis(10)),
                Err(_) => break,
            }
        }
        let _ = inner.child.kill();
        let _ = inner.child.wait();
    }
}

/// Start a model process and complete the hello/metadata handshake.
///
/// The bridge must declare the feature space's arity. When `output_names`
/// is non-empty it must match the declared output count, and those names
/// are used; otherwise the bridge's names are adopted.
pub fn spawn_external(
    command: &str,
    args: &[String],
    space: &FeatureSpace,
    output_names: &[String],
    opts: &ExternalOptions,
) -> Result<PredictorHandle> {
    let mut child = Command::new(command)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| Error::Spawn {
            command: command.to_string(),
            source,
        })?;

    let stdin = child.stdin.take();
    let stdout = child.stdout.take().expect("stdout is piped");
    let stderr = child.stderr.take().expect("stderr is piped");

    let (tx, lines) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(stdout).lines() {
            let Ok(line) = line else { break };
            if line.trim().is_empty() {
                continue;
            }
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    let stderr_tail = Arc::new(Mutex::new(VecDeque::new()));
    let tail = Arc::clone(&stderr_tail);
    let stderr_reader = thread::spawn(move || {
        for line in BufReader::new(stderr).lines() {
            let Ok(line) = line else { break };
            if let Ok(mut t) = tail.lock() {
                if t.len() == STDERR_TAIL {
                    t.pop_front();
                }
                t.push_back(line);
            }
        }
    });

    let mut inner = Inner {
        child,
        stdin,
        lines,
        next_id: 1,
        stderr_tail,
        stderr_reader: Some(stderr_reader),
    };
    let model_cmd = std::iter::once(command.to_string())
        .chain(args.iter().cloned())
        .collect::<Vec<_>>()
        .join(" ");

    let handshake = (|| {
        inner.send(&EngineMessage::Hello {
            protocol: PROTOCOL_VERSION,
        })?;
        let deadline = Instant::now() + opts.handshake_timeout;
        match inner.recv(deadline, opts.handshake_timeout)? {
            BridgeMessage::Metadata { arity, outputs } => Ok((arity, outputs)),
            BridgeMessage::Error { message, .. } => {
                Err(Error::Protocol(format!("model process refused handshake: {message}")))
            }
            other => Err(Error::Protocol(format!(
                "expected metadata, got {other:?}"
            ))),
        }
    })();

    let model = ExternalModel {
        command: model_cmd,
        categorical: space.features().iter().map(|f| f.is_categorical()).collect(),
        predict_timeout: opts.predict_timeout,
        inner: Mutex::new(inner),
    };
    // Dropping `model` on failure shuts the child down.
    let (arity, declared) = handshake?;
    if arity != space.len() {
        return Err(Error::Protocol(format!(
            "model process declares arity {arity} but the feature space has {} features",
            space.len()
        )));
    }
    if declared.is_empty() {
        return Err(Error::Protocol("model process declares no outputs".into()));
    }
    let names = if output_names.is_empty() {
        declared
    } else if output_names.len() == declared.len() {
        output_names.to_vec()
    } else {
        return Err(Error::Protocol(format!(
            "model process declares {} outputs ({}) but {} were requested",
            declared.len(),
            declared.join(", "),
            output_names.len()
        )));
    };
    Ok(PredictorHandle::external(model, arity, names))
}
