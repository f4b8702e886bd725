use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mr4mr::color::{analyze_frame, lookup, Frame, TABLE};
use mr4mr::conductor::{simulate, EngineConfig, Scenario};
use mr4mr::osc::{decode_packet, OscArg, OscMessage, OscPacket, MAX_DATAGRAM};
use mr4mr::room::RoomGeometry;
use mr4mr_bridge::{Bridge, BridgeOptions};

#[derive(Parser)]
#[command(
    name = "mr4mr",
    version,
    about = "Generative ambient music from a mixed-reality room"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the live engine: UDP OSC in and out, WebSocket bridge, static assets.
    Serve(ServeArgs),
    /// Run a scripted scenario on the simulated clock and write a MIDI file.
    Simulate(SimulateArgs),
    /// Print the key a scene image maps to.
    Color(ColorArgs),
    /// Print decoded OSC traffic arriving on a UDP port.
    OscMonitor(MonitorArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// Engine config (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Use the noise scale that reproduces the base melody unchanged.
    #[arg(long)]
    faithful: bool,
}

impl ConfigArg {
    fn load(&self) -> Result<EngineConfig> {
        let mut config = match &self.config {
            Some(p) => EngineConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
            None => EngineConfig::default(),
        };
        if self.faithful {
            config.noise_scale = EngineConfig::faithful().noise_scale;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    config: ConfigArg,
    /// Room description (TOML); overrides the config.
    #[arg(long)]
    room: Option<PathBuf>,
    /// Directory of UI assets served over HTTP.
    #[arg(long)]
    assets: Option<PathBuf>,
    /// UDP port for inbound OSC.
    #[arg(long)]
    osc_port: Option<u16>,
    /// HTTP/WebSocket port.
    #[arg(long)]
    bridge_port: Option<u16>,
    /// Destination for outbound OSC, host:port.
    #[arg(long)]
    emit: Option<String>,
    /// Do not send OSC over UDP.
    #[arg(long, conflicts_with = "emit")]
    no_emit: bool,
    /// Write everything played to this MIDI file on exit.
    #[arg(long)]
    record: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write the outbound OSC log, one message per line.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct ColorArgs {
    /// PNG or binary PPM.
    #[arg(long)]
    image: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also print the dominant color and the matched table row.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct MonitorArgs {
    #[arg(long, default_value_t = 9001)]
    port: u16,
    #[arg(long, default_value = "0.0.0.0")]
    host: String,
    /// Exit after this many messages.
    #[arg(long)]
    count: Option<usize>,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Serve(a) => serve(a),
        Command::Simulate(a) => run_simulation(a),
        Command::Color(a) => color(a),
        Command::OscMonitor(a) => monitor(a),
    }
}

fn serve(a: ServeArgs) -> Result<()> {
    let mut config = a.config.load()?;
    if let Some(p) = a.osc_port {
        config.listen_port = p;
    }
    if let Some(p) = a.bridge_port {
        config.bridge_port = p;
    }
    let room = a.room.as_ref().or(config.room.as_ref());
    let geometry = match room {
        Some(p) => RoomGeometry::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => RoomGeometry::default(),
    };
    let mut opts = BridgeOptions::from_config(config, geometry)?;
    if let Some(e) = &a.emit {
        opts.emit = Some(resolve(e)?);
    }
    if a.no_emit {
        opts.emit = None;
    }
    if let Some(dir) = &a.assets {
        if !dir.is_dir() {
            bail!("{} is not a directory", dir.display());
        }
    }
    opts.assets = a.assets;

    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let bridge = Bridge::start(opts).await?;
        println!(
            "osc {} · bridge ws://{}/ws",
            bridge.osc_addr(),
            bridge.http_addr()
        );
        tokio::signal::ctrl_c().await?;
        log::info!("shutting down");
        let midi = bridge.shutdown().await?;
        if let Some(path) = &a.record {
            midi.export(path)?;
            println!("wrote {} notes to {}", midi.notes().len(), path.display());
        }
        Ok(())
    })
}

fn resolve(addr: &str) -> Result<SocketAddr> {
    addr.to_socket_addrs()
        .with_context(|| format!("resolving {addr}"))?
        .next()
        .with_context(|| format!("{addr} has no address"))
}

fn run_simulation(a: SimulateArgs) -> Result<()> {
    let config = a.config.load()?;
    let scenario =
        Scenario::load(&a.scenario).with_context(|| format!("loading {}", a.scenario.display()))?;
    let out = simulate(&scenario, &config)?;
    std::fs::write(&a.out, &out.midi).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(path) = &a.log {
        let text: String = out
            .log
            .iter()
            .map(|e| format!("{:.4} {}\n", e.time, format_message(&e.message)))
            .collect();
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    let notes = out
        .log
        .iter()
        .filter(|e| e.message.address == mr4mr::conductor::schema::NOTE)
        .count();
    println!(
        "{:.1} s simulated, {notes} notes, {} bytes → {}",
        scenario.duration,
        out.midi.len(),
        a.out.display()
    );
    Ok(())
}

fn color(a: ColorArgs) -> Result<()> {
    let frame = load_frame(&a.image)?;
    let reading = analyze_frame(&frame, a.k, a.seed)?;
    if a.verbose {
        let m = lookup(reading.hsv);
        let d = reading.dominant;
        println!("dominant rgb({}, {}, {})", d.r, d.g, d.b);
        println!(
            "hsv({:.1}, {:.3}, {:.3})",
            reading.hsv.h, reading.hsv.s, reading.hsv.v
        );
        println!(
            "row {} ({}){}",
            m.row + 1,
            TABLE[m.row].name,
            if m.exact { "" } else { ", nearest" }
        );
    }
    println!("{}", reading.key);
    Ok(())
}

fn load_frame(path: &Path) -> Result<Frame> {
    Frame::load(path).with_context(|| format!("reading {}", path.display()))
}

fn monitor(a: MonitorArgs) -> Result<()> {
    let socket = UdpSocket::bind((a.host.as_str(), a.port))
        .with_context(|| format!("binding {}:{}", a.host, a.port))?;
    socket.set_read_timeout(Some(Duration::from_millis(200)))?;
    eprintln!("listening on {}", socket.local_addr()?);
    let mut buf = vec![0u8; MAX_DATAGRAM];
    let mut seen = 0;
    loop {
        let (n, from) = match socket.recv_from(&mut buf) {
            Ok(r) => r,
            Err(e)
                if matches!(
                    e.kind(),
                    std::io::ErrorKind::WouldBlock | std::io::ErrorKind::TimedOut
                ) =>
            {
                continue
            }
            Err(e) => return Err(e.into()),
        };
        match decode_packet(&buf[..n]) {
            Ok(p) => {
                for m in OscPacket::into_messages(p) {
                    println!("{}", format_message(&m));
                    seen += 1;
                    if a.count.is_some_and(|c| seen >= c) {
                        return Ok(());
                    }
                }
            }
            Err(e) => eprintln!("{from}: {n} bytes not OSC: {e}"),
        }
    }
}

/// `/addr ,tags arg arg …`; blobs show their length.
fn format_message(m: &OscMessage) -> String {
    let mut s = format!("{} ,{}", m.address, m.tags());
    for a in &m.args {
        s.push(' ');
        match a {
            OscArg::Int(v) => s.push_str(&v.to_string()),
            OscArg::Float(v) => s.push_str(&format!("{v:.4}")),
            OscArg::Str(v) => s.push_str(&format!("{v:?}")),
            OscArg::Blob(b) => s.push_str(&format!("<{} bytes>", b.len())),
        }
    }
    s
}
