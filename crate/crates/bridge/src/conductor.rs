use std::sync::mpsc::{self, Receiver, RecvTimeoutError, Sender, SyncSender, TrySendError};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use tokio::sync::{broadcast, oneshot};

use mr4mr::color::{analyze_frame, Frame, Rgb};
use mr4mr::conductor::{schema, Inbound, MidiRecording, Session};
use mr4mr::osc::{OscMessage, OscPacket, OscReceiver, OscSender, Received};

use crate::json::to_json;
use crate::{http, BridgeError, BridgeOptions};

/// Ticks run back to back before the loop gives up catching up.
const MAX_CATCH_UP: u64 = 30;
const BROADCAST_CAPACITY: usize = 4096;

pub(crate) struct Subscription {
    pub snapshot: Vec<OscMessage>,
    /// JSON lines, newline included.
    pub updates: broadcast::Receiver<Arc<str>>,
}

pub(crate) enum Input {
    Udp(Received),
    Message(OscMessage),
    Color(Rgb),
    Connect(oneshot::Sender<Subscription>),
    Shutdown,
}

impl From<Received> for Input {
    fn from(r: Received) -> Self {
        Input::Udp(r)
    }
}

/// A running engine. Drop without [`Bridge::shutdown`] leaves the threads
/// running until the process exits.
pub struct Bridge {
    osc_addr: std::net::SocketAddr,
    http_addr: std::net::SocketAddr,
    inputs: Sender<Input>,
    conductor: JoinHandle<MidiRecording>,
    http_stop: oneshot::Sender<()>,
    http: tokio::task::JoinHandle<()>,
    _receiver: OscReceiver,
}

impl Bridge {
    /// Binds every socket and starts the loop. Must run inside a tokio
    /// runtime.
    pub async fn start(opts: BridgeOptions) -> Result<Bridge, BridgeError> {
        let session = Session::new(opts.config.clone(), opts.geometry.clone())?;
        let (inputs, rx) = mpsc::channel();
        let receiver = OscReceiver::spawn(opts.osc_bind, inputs.clone())?;
        let sender = opts.emit.map(OscSender::new).transpose()?;
        let listener = tokio::net::TcpListener::bind(opts.http_bind).await?;
        let http_addr = listener.local_addr()?;

        let frames = spawn_frame_worker(opts.config.kmeans_k, opts.config.seed, inputs.clone())?;
        let conductor = std::thread::Builder::new()
            .name("conductor".into())
            .spawn(move || Conductor::new(session, sender, frames).run(rx))?;

        let (http_stop, stopped) = oneshot::channel();
        let app = http::router(inputs.clone(), opts.assets.as_deref());
        let http = tokio::spawn(async move {
            let serve = axum::serve(listener, app).with_graceful_shutdown(async {
                let _ = stopped.await;
            });
            if let Err(e) = serve.await {
                log::error!("http server: {e}");
            }
        });
        log::info!(
            "osc on {}, bridge on http://{http_addr}/ws{}",
            receiver.local_addr(),
            opts.emit
                .map(|a| format!(", emitting to {a}"))
                .unwrap_or_default()
        );
        Ok(Bridge {
            osc_addr: receiver.local_addr(),
            http_addr,
            inputs,
            conductor,
            http_stop,
            http,
            _receiver: receiver,
        })
    }

    pub fn osc_addr(&self) -> std::net::SocketAddr {
        self.osc_addr
    }

    pub fn http_addr(&self) -> std::net::SocketAddr {
        self.http_addr
    }

    /// Injects a message as if it had arrived over UDP.
    pub fn send(&self, msg: OscMessage) -> Result<(), BridgeError> {
        self.inputs
            .send(Input::Message(msg))
            .map_err(|_| BridgeError::Stopped)
    }

    /// Stops the loop and the server and returns everything played.
    pub async fn shutdown(self) -> Result<MidiRecording, BridgeError> {
        let _ = self.inputs.send(Input::Shutdown);
        let conductor = self.conductor;
        let midi = tokio::task::spawn_blocking(move || conductor.join())
            .await
            .map_err(|_| BridgeError::Stopped)?
            .map_err(|_| BridgeError::Stopped)?;
        let _ = self.http_stop.send(());
        let _ = self.http.await;
        Ok(midi)
    }
}

/// Frames queue one deep: a capture arriving while the worker is busy
/// replaces nothing and is dropped.
fn spawn_frame_worker(
    k: usize,
    seed: u64,
    out: Sender<Input>,
) -> std::io::Result<SyncSender<Frame>> {
    let (tx, rx) = mpsc::sync_channel::<Frame>(1);
    std::thread::Builder::new()
        .name("scene-color".into())
        .spawn(move || {
            for frame in rx {
                match analyze_frame(&frame, k, seed) {
                    Ok(reading) => {
                        log::debug!("frame dominant {:?} → {}", reading.dominant, reading.key);
                        if out.send(Input::Color(reading.dominant)).is_err() {
                            break;
                        }
                    }
                    Err(e) => log::warn!("frame: {e}"),
                }
            }
        })?;
    Ok(tx)
}

struct Conductor {
    session: Session,
    sender: Option<OscSender>,
    frames: SyncSender<Frame>,
    /// Frames closer together than the capture period are skipped.
    last_frame: Option<Instant>,
    updates: broadcast::Sender<Arc<str>>,
}

impl Conductor {
    fn new(session: Session, sender: Option<OscSender>, frames: SyncSender<Frame>) -> Self {
        let (updates, _) = broadcast::channel(BROADCAST_CAPACITY);
        Conductor {
            session,
            sender,
            frames,
            last_frame: None,
            updates,
        }
    }

    fn run(mut self, rx: Receiver<Input>) -> MidiRecording {
        let hz = self.session.config().tick_hz;
        let period = Duration::from_secs_f64(1.0 / hz);
        let mut start = Instant::now();
        for m in self.session.snapshot() {
            self.send_udp(&m);
        }
        loop {
            let deadline = start + period.mul_f64((self.session.ticks() + 1) as f64);
            loop {
                let now = Instant::now();
                if now >= deadline {
                    break;
                }
                match rx.recv_timeout(deadline - now) {
                    Ok(Input::Shutdown) | Err(RecvTimeoutError::Disconnected) => {
                        self.publish();
                        return self.session.finish();
                    }
                    Ok(input) => {
                        self.on_input(input);
                        self.publish();
                    }
                    Err(RecvTimeoutError::Timeout) => break,
                }
            }
            let due = (start.elapsed().as_secs_f64() * hz) as u64;
            let mut ran = 0;
            while self.session.ticks() < due && ran < MAX_CATCH_UP {
                self.session.tick();
                ran += 1;
            }
            if self.session.ticks() < due {
                let behind = due - self.session.ticks();
                log::warn!("conductor {behind} ticks behind; skipping ahead");
                start += period.mul_f64(behind as f64);
            }
            self.publish();
        }
    }

    fn on_input(&mut self, input: Input) {
        match input {
            Input::Udp(Received { from, packet }) => match packet {
                Ok(p) => {
                    for m in OscPacket::into_messages(p) {
                        self.on_message(m);
                    }
                }
                Err(e) => log::warn!("dropping datagram from {from}: {e}"),
            },
            Input::Message(m) => self.on_message(m),
            Input::Color(c) => {
                if let Some(k) = self.session.on_scene_color(c) {
                    log::info!("scene color {c:?} → {k}");
                }
            }
            Input::Connect(reply) => {
                let _ = reply.send(Subscription {
                    snapshot: self.session.snapshot(),
                    updates: self.updates.subscribe(),
                });
            }
            Input::Shutdown => unreachable!("handled by the loop"),
        }
    }

    fn on_message(&mut self, m: OscMessage) {
        // frames are analysed off the loop; everything else goes straight in
        if m.address == schema::SCENE_FRAME {
            match Inbound::parse(&m) {
                Ok(Some(Inbound::SceneFrame { width, height, rgb })) => {
                    let period =
                        Duration::from_secs_f64(self.session.config().capture_period.max(0.0));
                    if self.last_frame.is_some_and(|t| t.elapsed() < period) {
                        log::debug!("frame inside the capture period; skipping");
                        return;
                    }
                    match Frame::from_rgb_bytes(width, height, &rgb) {
                        Ok(frame) => match self.frames.try_send(frame) {
                            Ok(()) => self.last_frame = Some(Instant::now()),
                            Err(TrySendError::Full(_)) => {
                                log::debug!("frame worker busy; dropping frame")
                            }
                            Err(TrySendError::Disconnected(_)) => log::error!("frame worker gone"),
                        },
                        Err(e) => log::warn!("{}: {e}", m.address),
                    }
                }
                Ok(_) => {}
                Err(e) => log::warn!("{e}"),
            }
            return;
        }
        if let Err(e) = self.session.handle(&m) {
            log::warn!("{e}");
        }
    }

    fn publish(&mut self) {
        for e in self.session.drain() {
            self.send_udp(&e.message);
            if self.updates.receiver_count() > 0 {
                let mut line = to_json(&e.message);
                line.push('\n');
                let _ = self.updates.send(line.into());
            }
        }
    }

    fn send_udp(&self, m: &OscMessage) {
        if let Some(s) = &self.sender {
            if let Err(e) = s.send(&OscPacket::Message(m.clone())) {
                log::debug!("osc send to {}: {e}", s.target());
            }
        }
    }
}
