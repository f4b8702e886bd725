use std::net::{SocketAddr, UdpSocket};
use std::time::Duration;

use futures_util::{SinkExt, StreamExt};
use tokio::io::{AsyncReadExt, AsyncWriteExt};
use tokio::net::TcpStream;
use tokio::time::{timeout, Instant};
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

use mr4mr::color::Rgb;
use mr4mr::conductor::{schema, EngineConfig};
use mr4mr::osc::{decode_packet, encode_packet, OscArg, OscMessage, OscPacket};
use mr4mr::room::{ObjectKind, RoomGeometry};
use mr4mr::{KeyScale, Mode, Vec3};
use mr4mr_bridge::{from_json, to_json, Bridge, BridgeOptions};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

fn local(port: u16) -> SocketAddr {
    SocketAddr::from(([127, 0, 0, 1], port))
}

/// Bridge on ephemeral ports emitting to a fresh UDP socket.
async fn start(assets: Option<std::path::PathBuf>) -> (Bridge, UdpSocket) {
    start_with(EngineConfig::default(), assets).await
}

async fn start_with(
    config: EngineConfig,
    assets: Option<std::path::PathBuf>,
) -> (Bridge, UdpSocket) {
    let sink = UdpSocket::bind(local(0)).unwrap();
    sink.set_read_timeout(Some(Duration::from_millis(100)))
        .unwrap();
    let opts = BridgeOptions {
        config,
        geometry: RoomGeometry::default(),
        osc_bind: local(0),
        emit: Some(sink.local_addr().unwrap()),
        http_bind: local(0),
        assets,
    };
    (Bridge::start(opts).await.unwrap(), sink)
}

async fn connect(bridge: &Bridge) -> Ws {
    let (ws, _) = connect_async(format!("ws://{}/ws", bridge.http_addr()))
        .await
        .unwrap();
    ws
}

async fn send(ws: &mut Ws, msgs: &[OscMessage]) {
    let text: String = msgs.iter().map(|m| to_json(m) + "\n").collect();
    ws.send(Message::Text(text.into())).await.unwrap();
}

/// Reads lines until `pred` matches or the deadline passes. Returns all
/// lines read, the match last.
async fn read_until(ws: &mut Ws, secs: f64, pred: impl Fn(&OscMessage) -> bool) -> Vec<OscMessage> {
    let deadline = Instant::now() + Duration::from_secs_f64(secs);
    let mut seen = Vec::new();
    loop {
        let left = deadline.saturating_duration_since(Instant::now());
        let frame = match timeout(left, ws.next()).await {
            Ok(Some(Ok(Message::Text(t)))) => t,
            Ok(Some(Ok(_))) => continue,
            other => panic!(
                "no match within {secs} s ({} lines seen): {other:?}",
                seen.len()
            ),
        };
        assert!(
            frame.ends_with('\n'),
            "line-delimited frames end with a newline"
        );
        for line in frame.lines() {
            let m = from_json(line).unwrap();
            let hit = pred(&m);
            seen.push(m);
            if hit {
                return seen;
            }
        }
    }
}

fn is_key(k: KeyScale) -> impl Fn(&OscMessage) -> bool {
    move |m| *m == schema::key(k)
}

#[tokio::test(flavor = "multi_thread")]
async fn snapshot_on_connect() {
    let (bridge, _sink) = start(None).await;
    let mut ws = connect(&bridge).await;
    let first = read_until(&mut ws, 2.0, |m| m.address == schema::GRAVITY).await;
    let addrs: Vec<&str> = first.iter().map(|m| m.address.as_str()).collect();
    assert_eq!(addrs, [schema::ROOM, schema::KEY, schema::GRAVITY]);
    assert_eq!(first[0], schema::room(&RoomGeometry::default()));
    assert_eq!(first[1], schema::key(KeyScale::C_MAJOR));
    bridge.shutdown().await.unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn websocket_spawn_produces_state_collision_and_note_on_both_surfaces() {
    let (bridge, sink) = start(None).await;
    let mut ws = connect(&bridge).await;
    read_until(&mut ws, 2.0, |m| m.address == schema::GRAVITY).await;

    send(
        &mut ws,
        &[schema::spawn(ObjectKind::TypeB, Vec3::new(3.0, 0.6, 2.5))],
    )
    .await;
    let seen = read_until(&mut ws, 3.0, |m| m.address == schema::NOTE).await;
    let state = seen
        .iter()
        .find(|m| m.address == schema::STATE)
        .expect("state before the note");
    assert_eq!(state.args[..2], [OscArg::Int(0), OscArg::Int(1)]);
    let collision = seen
        .iter()
        .find(|m| m.address == schema::COLLISION)
        .expect("collision echoed");
    assert_eq!(collision.args[0], OscArg::Int(1));
    let note = seen.last().unwrap();
    assert_eq!(note.args[0], OscArg::Int(1), "TypeB plays on channel 1");
    let pitch = note.args[1].as_int().unwrap() as u8;
    assert!(KeyScale::C_MAJOR.contains(pitch), "{pitch}");

    // the same messages went out over UDP as OSC
    let mut buf = vec![0u8; 65536];
    let deadline = std::time::Instant::now() + Duration::from_secs(3);
    let mut udp_note = None;
    while udp_note.is_none() && std::time::Instant::now() < deadline {
        if let Ok(n) = sink.recv(&mut buf) {
            if let Ok(OscPacket::Message(m)) = decode_packet(&buf[..n]) {
                if m.address == schema::NOTE {
                    udp_note = Some(m);
                }
            }
        }
    }
    assert_eq!(udp_note.as_ref(), Some(note));
    bridge.shutdown().await.unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn websocket_frame_changes_key() {
    let (bridge, _sink) = start(None).await;
    let mut ws = connect(&bridge).await;
    read_until(&mut ws, 2.0, |m| m.address == schema::GRAVITY).await;
    let blue: Vec<u8> = [0u8, 0, 255].repeat(16 * 12);
    send(&mut ws, &[schema::scene_frame(16, 12, blue)]).await;
    read_until(&mut ws, 3.0, is_key(KeyScale::new(11, Mode::Major))).await;
    bridge.shutdown().await.unwrap();
}

fn solid(rgb: [u8; 3]) -> OscMessage {
    schema::scene_frame(8, 8, rgb.repeat(64))
}

/// Key messages seen within `secs`.
async fn keys_within(ws: &mut Ws, secs: f64) -> Vec<OscMessage> {
    let mut keys = Vec::new();
    let deadline = Instant::now() + Duration::from_secs_f64(secs);
    while let Ok(Some(Ok(Message::Text(t)))) = timeout(
        deadline.saturating_duration_since(Instant::now()),
        ws.next(),
    )
    .await
    {
        keys.extend(
            t.lines()
                .map(|l| from_json(l).unwrap())
                .filter(|m| m.address == schema::KEY),
        );
    }
    keys
}

#[tokio::test(flavor = "multi_thread")]
async fn frames_inside_the_capture_period_are_skipped() {
    let blue = schema::key(KeyScale::new(11, Mode::Major));
    let f_major = schema::key(KeyScale::new(5, Mode::Major));

    let (bridge, _sink) = start(None).await;
    let mut ws = connect(&bridge).await;
    read_until(&mut ws, 2.0, |m| m.address == schema::GRAVITY).await;
    send(&mut ws, &[solid([0, 0, 255])]).await;
    read_until(&mut ws, 3.0, |m| *m == blue).await;
    send(&mut ws, &[solid([240, 80, 80])]).await;
    assert_eq!(keys_within(&mut ws, 1.0).await, []);
    bridge.shutdown().await.unwrap();

    let config = EngineConfig {
        capture_period: 0.05,
        ..Default::default()
    };
    let (bridge, _sink) = start_with(config, None).await;
    let mut ws = connect(&bridge).await;
    read_until(&mut ws, 2.0, |m| m.address == schema::GRAVITY).await;
    send(&mut ws, &[solid([0, 0, 255])]).await;
    read_until(&mut ws, 3.0, |m| *m == blue).await;
    tokio::time::sleep(Duration::from_millis(100)).await;
    send(&mut ws, &[solid([240, 80, 80])]).await;
    read_until(&mut ws, 3.0, |m| *m == f_major).await;
    bridge.shutdown().await.unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn udp_input_reaches_websocket_clients() {
    let (bridge, _sink) = start(None).await;
    let mut a = connect(&bridge).await;
    let mut b = connect(&bridge).await;
    for ws in [&mut a, &mut b] {
        read_until(ws, 2.0, |m| m.address == schema::GRAVITY).await;
    }
    let tx = UdpSocket::bind(local(0)).unwrap();
    tx.send_to(b"garbage", bridge.osc_addr()).unwrap();
    let packet = encode_packet(&schema::scene_color(Rgb::new(240, 80, 80)).into()).unwrap();
    tx.send_to(&packet, bridge.osc_addr()).unwrap();
    let f_major = KeyScale::new(5, Mode::Major);
    read_until(&mut a, 3.0, is_key(f_major)).await;
    read_until(&mut b, 3.0, is_key(f_major)).await;
    bridge.shutdown().await.unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn malformed_json_is_ignored() {
    let (bridge, _sink) = start(None).await;
    let mut ws = connect(&bridge).await;
    read_until(&mut ws, 2.0, |m| m.address == schema::GRAVITY).await;
    ws.send(Message::Text("not json\n".into())).await.unwrap();
    ws.send(Message::Text(
        r#"{"address":"/mr4mr/key","args":[{"type":"i","value":2}]}"#.into(),
    ))
    .await
    .unwrap();
    send(&mut ws, &[schema::key(KeyScale::new(2, Mode::Minor))]).await;
    read_until(&mut ws, 3.0, is_key(KeyScale::new(2, Mode::Minor))).await;
    bridge.shutdown().await.unwrap();
}

#[tokio::test(flavor = "multi_thread")]
async fn shutdown_returns_the_recording() {
    let (bridge, _sink) = start(None).await;
    bridge
        .send(schema::spawn(ObjectKind::TypeA, Vec3::new(1.0, 0.4, 1.0)))
        .unwrap();
    tokio::time::sleep(Duration::from_millis(600)).await;
    let midi = bridge.shutdown().await.unwrap();
    assert!(
        midi.notes().iter().any(|n| n.channel == 0),
        "collision note recorded"
    );
    assert_eq!(midi.open_notes(), 0);
}

async fn http_get(addr: SocketAddr, path: &str) -> String {
    let mut s = TcpStream::connect(addr).await.unwrap();
    let req = format!("GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n");
    s.write_all(req.as_bytes()).await.unwrap();
    let mut out = String::new();
    s.read_to_string(&mut out).await.unwrap();
    out
}

#[tokio::test(flavor = "multi_thread")]
async fn serves_static_assets() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<h1>room</h1>").unwrap();
    std::fs::write(dir.path().join("app.js"), "console.log(1)").unwrap();
    let (bridge, _sink) = start(Some(dir.path().to_path_buf())).await;
    let addr = bridge.http_addr();

    let index = http_get(addr, "/").await;
    assert!(index.starts_with("HTTP/1.1 200"), "{index}");
    assert!(index.contains("<h1>room</h1>"));
    let js = http_get(addr, "/app.js").await;
    assert!(js.starts_with("HTTP/1.1 200"));
    assert!(
        js.to_ascii_lowercase()
            .contains("content-type: text/javascript"),
        "{js}"
    );
    assert!(http_get(addr, "/missing.css")
        .await
        .starts_with("HTTP/1.1 404"));

    // the websocket route still wins over the asset directory
    let mut ws = connect(&bridge).await;
    read_until(&mut ws, 2.0, |m| m.address == schema::ROOM).await;
    bridge.shutdown().await.unwrap();
}
