//! Child-process backend.
//!
//! One request per process: the prompt is written to stdin as a 4D `f32`
//! VVOL (5 channels), and stdout must carry exactly one 3D `f32` VVOL of the
//! same spatial shape. Stderr is inherited. The process must exit with 0.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::{validate_output, SegmentContext, Segmenter};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::prompts::PromptTensor;
use crate::volume::{decode_vvol, Buffer};

const POLL_INTERVAL: Duration = Duration::from_millis(2);

#[derive(Clone, Debug)]
pub struct ExternalSegmenter {
    pub program: PathBuf,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl ExternalSegmenter {
    pub fn new(program: impl Into<PathBuf>, timeout: Duration) -> Self {
        ExternalSegmenter {
            program: program.into(),
            args: Vec::new(),
            timeout,
        }
    }

    pub fn with_args(mut self, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.args = args.into_iter().map(Into::into).collect();
        self
    }
}

impl Segmenter for ExternalSegmenter {
    fn name(&self) -> &str {
        "exec"
    }

    fn segment(&mut self, prompt: &PromptTensor, _ctx: &SegmentContext<'_>) -> Result<Grid<f32>> {
        external_segment(self, prompt)
    }
}

/// Runs one request against a fresh child process.
pub fn external_segment(child: &ExternalSegmenter, prompt: &PromptTensor) -> Result<Grid<f32>> {
    let mut proc = Command::new(&child.program)
        .args(&child.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .map_err(Error::ChildLaunchFailed)?;

    let request = prompt.to_vvol_bytes();
    let mut stdin = proc.stdin.take().expect("piped stdin");
    let writer = thread::spawn(move || {
        // a child that exits early closes the pipe; its status decides the outcome
        let _ = stdin.write_all(&request);
    });
    let mut stdout = proc.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut buf = Vec::new();
        stdout.read_to_end(&mut buf).map(|_| buf)
    });

    let deadline = Instant::now() + child.timeout;
    let status = loop {
        if let Some(status) = proc.try_wait()? {
            break status;
        }
        if Instant::now() >= deadline {
            let _ = proc.kill();
            let _ = proc.wait();
            // grandchildren may still hold the pipes, so the I/O threads are
            // left to finish on their own
            return Err(Error::ChildTimeout(child.timeout.as_secs_f64()));
        }
        thread::sleep(POLL_INTERVAL);
    };
    let _ = writer.join();
    let response = reader
        .join()
        .map_err(|_| Error::ProtocolError("stdout reader panicked".into()))??;
    if !status.success() {
        return Err(Error::ChildExitNonzero(status.to_string()));
    }

    let array = decode_vvol(&response).map_err(|e| Error::ProtocolError(e.to_string()))?;
    if array.dims.len() != 3 {
        return Err(Error::ProtocolError(format!(
            "expected a 3D response, got dims {:?}",
            array.dims
        )));
    }
    let Buffer::F32(data) = array.data else {
        return Err(Error::ProtocolError(format!(
            "expected f32 response, got {:?}",
            array.data.elem()
        )));
    };
    let shape = [array.dims[0], array.dims[1], array.dims[2]];
    let out = Grid::from_vec(shape, data)?;
    validate_output(prompt, &out)?;
    Ok(out)
}
