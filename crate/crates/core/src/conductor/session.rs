//! The conductor loop: one clock driving physics, sonification, the melody
//! loop and MIDI recording.
//!
//! Time advances only through [`Session::tick`], so headless runs with a
//! simulated clock and live runs paced by the wall clock share every line
//! of this code.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::midi::{MidiRecording, NoteId};
use super::scenario::{Action, Command, Scenario};
use super::schema::{self, Inbound};
use super::{ConductorError, EngineConfig};
use crate::color::{analyze_frame, hsv_to_keyscale, rgb_to_hsv, Frame, Rgb};
use crate::key::KeyScale;
use crate::melody::{
    continue_melody, BaseMelody, CollisionWindow, DefaultModel, LoopScheduler, MarkovModel,
    MelodyModel, Playback, STEPS_PER_BAR,
};
use crate::osc::OscMessage;
use crate::room::{maybe_mutate_gravity, CollisionEvent, ObjectKind, RoomGeometry, Surface, World};
use crate::sonify::{sonify, Listener, NoteEvent, SonifyParams};
use crate::vec3::Vec3;

/// An outbound message stamped with session time.
#[derive(Debug, Clone, PartialEq)]
pub struct Emitted {
    pub time: f64,
    pub message: OscMessage,
}

/// Structural melody events, kept for inspection.
#[derive(Debug, Clone, PartialEq)]
pub enum Trace {
    Base { time: f64, base: BaseMelody },
    Playback { time: f64, event: Playback },
    KeyChanged { time: f64, key: KeyScale },
    Gravity { time: f64, g: Vec3 },
}

pub struct Session {
    config: EngineConfig,
    world: World,
    listener: Listener,
    sonify: SonifyParams,
    key: KeyScale,
    scheduler: LoopScheduler,
    window: CollisionWindow,
    model: Box<dyn MelodyModel>,
    rng: ChaCha8Rng,
    tick: u64,
    next_step: u64,
    state_every: u64,
    last_color: Option<Rgb>,
    pending_offs: Vec<(f64, NoteId)>,
    loop_note: Option<NoteId>,
    midi: MidiRecording,
    outbox: Vec<Emitted>,
    trace: Vec<Trace>,
}

impl Session {
    /// Loads the corpus named in the config, or the bundled one.
    pub fn new(config: EngineConfig, geometry: RoomGeometry) -> Result<Self, ConductorError> {
        let model = match &config.corpus {
            Some(path) => DefaultModel::new(MarkovModel::from_corpus_file(path)?),
            None => DefaultModel::bundled(),
        };
        Self::with_model(config, geometry, Box::new(model))
    }

    pub fn with_model(
        config: EngineConfig,
        geometry: RoomGeometry,
        model: Box<dyn MelodyModel>,
    ) -> Result<Self, ConductorError> {
        config.validate()?;
        geometry.validate()?;
        let listener_position = config.listener_position.unwrap_or_else(|| {
            let c = geometry.center();
            Vec3::new(c.x, 1.6_f64.min(geometry.height()), c.z)
        });
        let listener =
            Listener::new(listener_position, config.listener_forward).ok_or_else(|| {
                ConductorError::Config("listener_forward must have a horizontal part".into())
            })?;
        let sonify = SonifyParams {
            room_height: geometry.height(),
            v_max: config.v_max,
        };
        let mut midi = MidiRecording::new(config.bpm);
        for ch in 0..3u8 {
            midi.set_program(ch, config.program_for_channel(ch));
        }
        midi.set_program(config.loop_channel, config.programs[3]);
        let state_every = if config.state_hz > 0.0 {
            ((config.tick_hz / config.state_hz).round() as u64).max(1)
        } else {
            0
        };
        Ok(Session {
            world: World::new(geometry, config.physics_params()),
            listener,
            sonify,
            key: config.initial_key,
            scheduler: LoopScheduler::new(
                config.initial_key,
                config.loops_before_mutation,
                config.noise_scale,
            ),
            window: CollisionWindow::new(config.window_params()),
            model,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            tick: 0,
            next_step: 0,
            state_every,
            last_color: None,
            pending_offs: Vec::new(),
            loop_note: None,
            midi,
            outbox: Vec::new(),
            trace: Vec::new(),
            config,
        })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn key(&self) -> KeyScale {
        self.key
    }

    pub fn scheduler(&self) -> &LoopScheduler {
        &self.scheduler
    }

    pub fn midi(&self) -> &MidiRecording {
        &self.midi
    }

    pub fn trace(&self) -> &[Trace] {
        &self.trace
    }

    /// Session time in seconds.
    pub fn time(&self) -> f64 {
        self.tick as f64 / self.config.tick_hz
    }

    pub fn ticks(&self) -> u64 {
        self.tick
    }

    /// Messages a newly connected client needs to draw the current scene.
    pub fn snapshot(&self) -> Vec<OscMessage> {
        let mut out = vec![
            schema::room(self.world.geometry()),
            schema::key(self.key),
            schema::gravity(self.world.gravity.g),
        ];
        out.extend(
            self.world
                .objects()
                .iter()
                .enumerate()
                .map(|(id, o)| schema::state(id, o.kind, o.position)),
        );
        out
    }

    /// Takes everything emitted since the last call.
    pub fn drain(&mut self) -> Vec<Emitted> {
        std::mem::take(&mut self.outbox)
    }

    fn emit(&mut self, time: f64, message: OscMessage) {
        self.outbox.push(Emitted { time, message });
    }

    pub fn spawn(&mut self, kind: ObjectKind, position: Vec3) -> Result<usize, ConductorError> {
        let id = self
            .world
            .spawn(kind, position, self.config.object_radius)?;
        let p = self.world.objects()[id].position;
        self.emit(self.time(), schema::state(id, kind, p));
        Ok(id)
    }

    pub fn impulse(&mut self, object: usize, velocity: Vec3) -> Result<(), ConductorError> {
        Ok(self.world.apply_impulse(object, velocity)?)
    }

    pub fn grab(&mut self, object: usize, position: Vec3) -> Result<(), ConductorError> {
        self.world.grab_move(object, position)?;
        let o = &self.world.objects()[object];
        let msg = schema::state(object, o.kind, o.position);
        self.emit(self.time(), msg);
        Ok(())
    }

    pub fn release(&mut self, object: usize) -> Result<(), ConductorError> {
        Ok(self.world.release(object)?)
    }

    /// Applies a scene color. Collision notes use the new key at once; the
    /// loop switches at its next bar line. Returns the new key, or `None`
    /// when nothing changed.
    pub fn on_scene_color(&mut self, color: Rgb) -> Option<KeyScale> {
        if self.last_color == Some(color) {
            return None;
        }
        self.last_color = Some(color);
        let key = hsv_to_keyscale(rgb_to_hsv(color));
        self.set_key(key).then_some(key)
    }

    /// Runs k-means on a frame and applies the dominant color.
    pub fn on_frame(&mut self, frame: &Frame) -> Result<Option<KeyScale>, ConductorError> {
        let reading = analyze_frame(frame, self.config.kmeans_k, self.config.seed)?;
        log::debug!(
            "frame {}x{}: dominant {:?} → {}",
            frame.width,
            frame.height,
            reading.dominant,
            reading.key
        );
        Ok(self.on_scene_color(reading.dominant))
    }

    /// Returns false if `key` is already current.
    pub fn set_key(&mut self, key: KeyScale) -> bool {
        if key == self.key {
            return false;
        }
        self.key = key;
        self.scheduler.set_key(key);
        let t = self.time();
        self.trace.push(Trace::KeyChanged { time: t, key });
        self.emit(t, schema::key(key));
        true
    }

    /// Acts on one inbound OSC message. Messages for other consumers are
    /// ignored.
    pub fn handle(&mut self, msg: &OscMessage) -> Result<(), ConductorError> {
        let Some(inbound) = Inbound::parse(msg)? else {
            log::trace!("ignoring {}", msg.address);
            return Ok(());
        };
        match inbound {
            Inbound::Collision {
                kind,
                speed,
                position,
            } => {
                let event = CollisionEvent {
                    object: usize::MAX,
                    kind,
                    speed,
                    position,
                    surface: Surface::Furniture("external".into()),
                    timestamp: self.time(),
                };
                self.on_collision(&event);
            }
            Inbound::SceneColor(c) => {
                self.on_scene_color(c);
            }
            Inbound::SceneFrame { width, height, rgb } => {
                let frame = Frame::from_rgb_bytes(width, height, &rgb)?;
                self.on_frame(&frame)?;
            }
            Inbound::Key(k) => {
                self.set_key(k);
            }
            Inbound::Spawn { kind, position } => {
                self.spawn(kind, position)?;
            }
            Inbound::Impulse { object, velocity } => self.impulse(object, velocity)?,
            Inbound::Grab { object, position } => self.grab(object, position)?,
            Inbound::Release { object } => self.release(object)?,
        }
        Ok(())
    }

    /// Applies one scripted command at the current time.
    pub fn apply(&mut self, command: &Command) -> Result<(), ConductorError> {
        match &command.action {
            Action::Spawn { kind, position } => {
                self.spawn(*kind, *position)?;
            }
            Action::Impulse { object, velocity } => self.impulse(*object, *velocity)?,
            Action::Grab { object, position } => self.grab(*object, *position)?,
            Action::Release { object } => self.release(*object)?,
            Action::Color { rgb } => {
                self.on_scene_color(Rgb::new(rgb[0], rgb[1], rgb[2]));
            }
            Action::Image { path } => {
                let frame = Frame::load(path)?;
                self.on_frame(&frame)?;
            }
        }
        Ok(())
    }

    /// Advances one physics tick: due note-offs and loop steps first, then
    /// the physics step and the notes of its collisions, then object state.
    pub fn tick(&mut self) {
        let dt = 1.0 / self.config.tick_hz;
        self.tick += 1;
        let now = self.time();

        self.advance_clock(now);

        let events = self.world.step(dt);
        for e in &events {
            let mut e = e.clone();
            e.timestamp = now;
            self.on_collision(&e);
        }

        if self.state_every > 0 && self.tick.is_multiple_of(self.state_every) {
            let states: Vec<OscMessage> = self
                .world
                .objects()
                .iter()
                .enumerate()
                .map(|(id, o)| schema::state(id, o.kind, o.position))
                .collect();
            for m in states {
                self.emit(now, m);
            }
        }
    }

    /// Emits collision note-offs and loop steps due at or before `now`, in
    /// time order.
    fn advance_clock(&mut self, now: f64) {
        let grid = self.config.grid();
        loop {
            let step_time = self.next_step as f64 * grid;
            let step_due = step_time <= now + 1e-9;
            let off_due = self.pending_offs.first().filter(|(t, _)| *t <= now + 1e-9);
            match (off_due, step_due) {
                (Some(&(t, id)), _) if !step_due || t < step_time => {
                    self.pending_offs.remove(0);
                    self.midi.note_off(id, t);
                }
                (_, true) => {
                    let step = self.next_step;
                    self.next_step += 1;
                    self.on_loop_step(step, step_time);
                }
                _ => break,
            }
        }
    }

    fn on_loop_step(&mut self, step: u64, time: f64) {
        let events = self
            .scheduler
            .on_step(step, self.model.as_ref(), &mut self.rng);
        for event in events {
            match &event {
                Playback::NoteOn {
                    pitch,
                    origin_height,
                    ..
                } => {
                    let note = NoteEvent {
                        pitch: *pitch,
                        velocity: self.config.loop_velocity,
                        channel: self.config.loop_channel,
                        pan: 0.0,
                        gain: 1.0,
                        timestamp: time,
                    };
                    self.loop_note =
                        Some(
                            self.midi
                                .note_on(note.channel, note.pitch, note.velocity, time),
                        );
                    self.emit(time, schema::note(&note));
                    self.emit(time, schema::wave(*origin_height, *pitch));
                }
                Playback::NoteOff { .. } => {
                    if let Some(id) = self.loop_note.take() {
                        self.midi.note_off(id, time);
                    }
                }
                Playback::LoopStarted { .. }
                | Playback::Reincarnated { .. }
                | Playback::Requantized { .. } => {
                    log::debug!("step {step}: {event:?}");
                }
            }
            if !matches!(event, Playback::NoteOn { .. } | Playback::NoteOff { .. }) {
                self.trace.push(Trace::Playback { time, event });
            }
        }
    }

    fn on_collision(&mut self, event: &CollisionEvent) {
        let t = event.timestamp;
        let note = sonify(event, &self.listener, self.key, &self.sonify);
        self.emit(t, schema::collision(event));
        self.emit(t, schema::note(&note));
        let id = self
            .midi
            .note_on(note.channel, note.pitch, note.velocity, t);
        self.pending_offs
            .push((t + self.config.collision_note_seconds, id));

        if let Some(gravity) = maybe_mutate_gravity(event, &mut self.rng) {
            self.world.gravity = gravity;
            self.trace.push(Trace::Gravity {
                time: t,
                g: gravity.g,
            });
            self.emit(t, schema::gravity(gravity.g));
        }

        if let Some(base) = self.window.push(note, event.position.y) {
            let seed = self.rng.next_u64();
            match continue_melody(&base.sequence, self.model.as_ref(), self.key, seed) {
                Ok(sequence) => {
                    self.scheduler.queue_base(sequence, base.origin_height);
                    self.trace.push(Trace::Base {
                        time: t,
                        base: BaseMelody {
                            sequence,
                            origin_height: base.origin_height,
                        },
                    });
                }
                Err(e) => log::warn!("discarding base melody: {e}"),
            }
        }
    }

    /// Closes all sounding notes at the current time and returns the
    /// recording.
    pub fn finish(mut self) -> MidiRecording {
        let now = self.time();
        for (t, id) in std::mem::take(&mut self.pending_offs) {
            self.midi.note_off(id, t.min(now));
        }
        self.midi.close_all(now);
        self.midi
    }
}

/// Step index of the first bar line strictly after `time`.
pub fn next_bar_step(time: f64, bpm: f64) -> u64 {
    let grid = 60.0 / bpm / 4.0;
    let step = (time / grid).floor() as u64 + 1;
    step.div_ceil(STEPS_PER_BAR as u64) * STEPS_PER_BAR as u64
}

pub struct SimulationOutput {
    pub midi: Vec<u8>,
    pub log: Vec<Emitted>,
    pub trace: Vec<Trace>,
}

/// Runs a scenario on the simulated clock. Commands apply at the first tick
/// boundary at or after their time.
pub fn simulate(
    scenario: &Scenario,
    config: &EngineConfig,
) -> Result<SimulationOutput, ConductorError> {
    let mut config = config.clone();
    if let Some(seed) = scenario.seed {
        config.seed = seed;
    }
    let geometry = match scenario.geometry()? {
        Some(g) => g,
        None => match &config.room {
            Some(p) => RoomGeometry::load(p)?,
            None => RoomGeometry::default(),
        },
    };
    let mut session = Session::new(config, geometry)?;
    let mut log = Vec::new();
    for m in session.snapshot() {
        log.push(Emitted {
            time: 0.0,
            message: m,
        });
    }
    let total = (scenario.duration * session.config().tick_hz).round() as u64;
    let mut commands = scenario.commands.iter().peekable();
    for _ in 0..total {
        while let Some(c) = commands.next_if(|c| c.at <= session.time() + 1e-9) {
            if let Err(e) = session.apply(c) {
                log::warn!("command at {}s failed: {e}", c.at);
            }
        }
        session.tick();
        log.extend(session.drain());
    }
    let trace = session.trace().to_vec();
    let midi = session.finish().to_smf();
    Ok(SimulationOutput { midi, log, trace })
}
