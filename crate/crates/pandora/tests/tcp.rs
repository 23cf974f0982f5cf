// SPDX-License-Identifier: Apache-2.0

use std::io::{Read, Write};
use std::net::{Shutdown, TcpStream};
use std::thread;
use std::time::Duration;

use pandora::client::replay_tcp;
use pandora::server::{Server, ServerConfig};
use pandora_core::corpus::challenge;
use pandora_core::pbf::PandoraBinary;
use pandora_core::pov::parse_pov;
use pandora_core::range::{decode_frame, encode_frame, Channel, Frame, Success, Verdict, VmEnd};
use pandora_core::replay::ReplayError;

fn start(binary: PandoraBinary, seed: u64, sessions: u64) -> (u16, thread::JoinHandle<Vec<Verdict>>) {
    let config = ServerConfig { seed, idle_timeout: Duration::from_secs(5), ..ServerConfig::default() };
    let server = Server::bind("127.0.0.1:0", binary, config).unwrap();
    let port = server.local_addr().unwrap().port();
    (port, thread::spawn(move || server.serve(Some(sessions)).unwrap()))
}

#[test]
fn reference_povs_over_tcp() {
    for (name, want) in [("greeter", Success::Type1), ("leaky", Success::Type2)] {
        let ch = challenge(name).unwrap();
        let (port, h) = start(ch.binary.clone(), 99, 1);
        let r = replay_tcp(ch.reference_pov.as_ref().unwrap(), "127.0.0.1", port, Duration::from_secs(10)).unwrap();
        assert_eq!(r.verdict.success, want, "{name}");
        assert!(r.succeeded());
        assert_eq!(h.join().unwrap(), vec![r.verdict]);
    }
}

#[test]
fn connections_get_distinct_negotiations() {
    let ch = challenge("greeter").unwrap();
    let (port, h) = start(ch.binary.clone(), 5, 3);
    let pov = ch.reference_pov.unwrap();
    let reports: Vec<String> = (0..3)
        .map(|_| replay_tcp(&pov, "127.0.0.1", port, Duration::from_secs(10)).unwrap().report("x"))
        .collect();
    h.join().unwrap();
    assert_ne!(reports[0], reports[1]);
    assert_ne!(reports[1], reports[2]);
}

#[test]
fn failing_pov_reports_none() {
    let ch = challenge("greeter").unwrap();
    let (port, h) = start(ch.binary.clone(), 1, 1);
    let pov = parse_pov("pov 1\nnegotiate type1 ipmask=ffffffff regmask=ffffffff regnum=5\nwrite \"3\\n\"\nwaitclose\n").unwrap();
    let r = replay_tcp(&pov, "127.0.0.1", port, Duration::from_secs(10)).unwrap();
    assert_eq!(r.verdict.success, Success::None);
    assert_eq!(r.verdict.end, VmEnd::Exited(0));
    assert!(!r.succeeded());
    h.join().unwrap();
}

#[test]
fn raw_client_sees_framed_output_and_verdict() {
    let ch = challenge("greeter").unwrap();
    let (port, h) = start(ch.binary.clone(), 1, 1);
    let mut s = TcpStream::connect(("127.0.0.1", port)).unwrap();
    s.write_all(&encode_frame(&Frame::new(Channel::Stdin, b"3\n".to_vec()))).unwrap();
    s.shutdown(Shutdown::Write).unwrap();
    let mut buf = Vec::new();
    s.read_to_end(&mut buf).unwrap();
    let mut frames = Vec::new();
    let mut at = 0;
    while let Some((f, n)) = decode_frame(&buf[at..]).unwrap() {
        frames.push(f);
        at += n;
    }
    assert_eq!(at, buf.len());
    let last = frames.pop().unwrap();
    assert_eq!(last.channel, Channel::Verdict);
    assert!(frames.iter().all(|f| f.channel == Channel::Stdout));
    let text: Vec<u8> = frames.into_iter().flat_map(|f| f.payload).collect();
    assert!(text.ends_with(b"bye\n"), "{:?}", String::from_utf8_lossy(&text));
    h.join().unwrap();
}

#[test]
fn garbage_gets_a_verdict_too() {
    let ch = challenge("greeter").unwrap();
    let (port, h) = start(ch.binary.clone(), 1, 1);
    let mut s = TcpStream::connect(("127.0.0.1", port)).unwrap();
    s.write_all(b"GET / HTTP/1.0\r\n\r\n").unwrap();
    let mut buf = Vec::new();
    s.read_to_end(&mut buf).unwrap();
    let v = h.join().unwrap().pop().unwrap();
    assert_eq!(v.success, Success::None);
    assert!(!v.note.is_empty());
}

#[test]
fn refused_connection_is_an_error() {
    let port = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let pov = challenge("greeter").unwrap().reference_pov.unwrap();
    assert!(matches!(replay_tcp(&pov, "127.0.0.1", port, Duration::from_secs(2)), Err(ReplayError::Connect(_))));
}
