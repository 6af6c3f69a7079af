// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::io::{BufRead, BufReader, Cursor, Write};
use std::net::TcpStream;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use ternpuf::session::{interactive_session, SessionConfig};
use ternpuf::wire::{self, Service, WireResponse};
use ternpuf_core::apg::{
    expand, generate_response, hash_sha256, mask_address, mask_addresses, rotated_variants,
    AddressList, MessageDigest, ADDRESS_COUNT, LONG_DIGEST_LEN, RESPONSE_BITS,
};
use ternpuf_core::metrics::{inter_device_study, InterParams};
use ternpuf_core::render::hex_bytes;
use ternpuf_core::{
    enroll, ApgConfig, BiasModel, CellState, Error, SramPufDevice, TernaryMap, Vault,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn unhex(s: &str) -> Vec<u8> {
    s.split_whitespace()
        .map(|b| u8::from_str_radix(b, 16).unwrap())
        .collect()
}

const ID: &[u8] = b"PasswordManagementWithWifire";
const PW: &[u8] = b"1-MBIT SRAM";

const SHIFT_ROW2: &str =
    "2D 50 DE D1 42 09 57 EB 04 2B C4 0F 08 DB 2B 2C 14 52 BB 4D E6 E0 63 B5 ED 43 9C 26 7C 15 78 04";

const MDS: [&str; 7] = [
    "0C 16 CB EB 67 25 7E D2 73 0D 77 88 23 76 B2 F2 BF 8A 1C 8A 47 06 60 6E BA 02 F3 86 80 AB EC 53",
    "31 4F 1C 02 14 7F 0F EC EB 79 D9 FE F4 AC 64 5A 25 08 7A 56 86 DE 5A C5 97 2A 4D 44 19 83 D3 B7",
    "1C 61 95 65 06 47 EB 2B 6E 30 AE 4F 95 D5 C7 41 90 89 C0 14 EE D3 F2 7E D9 37 BA 48 C8 C8 2E 3F",
    "D3 DD 4E 97 0F A6 FA C2 9E 7A F5 21 01 99 43 46 64 51 73 B1 37 1C 8D 62 E3 F3 A5 E0 E8 43 E3 A6",
    "DC F1 43 A4 B2 8E 01 6B 63 22 5A 54 D7 B5 CC 5F 26 3A AE 4C 4E 7F FA 1A E1 7C 49 9D BF E4 B3 4E",
    "E3 8F BC EB 70 4F 6D 8A 16 CD CB 70 1B E3 31 AF E3 BF 59 79 33 17 94 B3 61 D8 B7 AF 92 34 C9 87",
    "05 A7 10 72 12 E9 D4 10 58 D2 5B 62 76 76 A8 69 53 4B 97 85 3B 47 86 E2 2D 6E CA 8D 26 97 2C CE",
];

fn rotation() -> Check {
    let expected = [
        0x16A8u16, 0x2D50, 0x5AA0, 0xB540, 0x6A81, 0xD502, 0xAA05, 0x540B,
    ];
    let md = MessageDigest([0x5A; 32]).with_leading_word(0x16A8);
    let t = Instant::now();
    let variants = rotated_variants(&md);
    let elapsed = t.elapsed();
    let words: Vec<u16> = variants.iter().map(|v| v.leading_word()).collect();
    ensure(words == expected, || format!("got {words:04X?}"))?;
    for v in &variants {
        ensure(v.0[2..] == md.0[2..], || "tail bytes changed".into())?;
    }
    ensure(elapsed < Duration::from_millis(1), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("8 rotated words bit-exact in {elapsed:?}"))
}

fn expander() -> Check {
    // oracle: the second rotation row hashes to the second digest block
    let oracle = hash_sha256(&unhex(SHIFT_ROW2));
    ensure(oracle.0[..] == unhex(MDS[0])[..], || {
        "SHA-256 of rotation row 2 is not MD2".into()
    })?;

    let config = ApgConfig::default();
    let t = Instant::now();
    let md = config.credential_digest(ID, PW);
    let long = expand(&md, config.expander);
    let elapsed = t.elapsed();
    for (i, want) in MDS.iter().enumerate() {
        let got = hex_bytes(long.block(i + 1).as_bytes());
        ensure(got == *want, || format!("MD{} = {got}", i + 2))?;
    }
    ensure(long.as_bytes().len() == LONG_DIGEST_LEN, || {
        "long digest length".into()
    })?;
    ensure(elapsed < Duration::from_millis(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "MD2..MD8 bit-exact ({:?} expander) in {elapsed:?}",
        config.expander
    ))
}

fn sha256_vectors() -> Check {
    let cases: [(&[u8], &str); 3] = [
        (
            b"",
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855",
        ),
        (
            b"abc",
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad",
        ),
        (
            b"abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq",
            "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1",
        ),
    ];
    for (msg, want) in cases {
        let got: String = hash_sha256(msg)
            .0
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        ensure(got == want, || {
            format!("{:?}: {got}", String::from_utf8_lossy(msg))
        })?;
    }
    Ok("empty, abc and 448-bit two-block vectors".into())
}

fn transcript() -> Check {
    const WANT: &str = "Enter your ID\nPasswordManagementWithWifire\n\nEnter your Password\n1-MBIT SRAM\n\n\
Entered ID:\n0X50 61 73 73 77 6F 72 64 4D 61 6E 61 67 65 6D 65 6E 74 57 69 74 68 57 69 66 69 72 65\n\
Entered Password:\n0X31 2D 4D 42 49 54 20 53 52 41 4D\n";
    let mut out = Vec::new();
    interactive_session(
        &mut Cursor::new(&b"PasswordManagementWithWifire\n1-MBIT SRAM\n"[..]),
        &mut out,
        &SessionConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let out = String::from_utf8(out).map_err(|e| e.to_string())?;
    ensure(out == WANT, || format!("transcript differs:\n{out}"))?;
    Ok("ID and password hex blocks byte-for-byte".into())
}

fn random_map(rng: &mut StdRng, cells: usize) -> TernaryMap {
    let mut states: Vec<CellState> = (0..cells)
        .map(|_| match rng.gen_range(0..3) {
            0 => CellState::Stable0,
            1 => CellState::Stable1,
            _ => CellState::Fuzzy,
        })
        .collect();
    let keep = rng.gen_range(0..cells);
    if states[keep].is_fuzzy() {
        states[keep] = CellState::Stable0;
    }
    TernaryMap::from_states(states, 200, [0; 16]).unwrap()
}

fn pipeline_shape() -> Check {
    let mut rng = StdRng::seed_from_u64(0x5eed_0005);
    let dev = SramPufDevice::build(65536, &BiasModel::default(), 5).unwrap();
    let device_map = enroll(&dev, 200, 0).unwrap();
    let configs = [
        ApgConfig::default(),
        ApgConfig {
            expander: ternpuf_core::ExpanderVariant::RehashAll,
            endianness: ternpuf_core::Endianness::Little,
            hash_input: ternpuf_core::HashInput::IdPassword,
        },
    ];
    let n = 1000;
    for k in 0..n {
        let id: Vec<u8> = (0..rng.gen_range(0..=64)).map(|_| rng.gen()).collect();
        let pw: Vec<u8> = (0..rng.gen_range(0..=96)).map(|_| rng.gen()).collect();
        let small;
        let map = if k % 2 == 0 {
            &device_map
        } else {
            let cells = rng.gen_range(1..=65536);
            small = random_map(&mut rng, cells);
            &small
        };
        let config = configs[k % 2];
        let trace = config
            .trace(&id, &pw, map, map)
            .map_err(|e| e.to_string())?;
        ensure(trace.long.as_bytes().len() == 256, || {
            "long digest not 256 bytes".into()
        })?;
        ensure(
            trace.masked.addresses().len() == ADDRESS_COUNT && ADDRESS_COUNT == 128,
            || "address count".into(),
        )?;
        ensure(
            trace
                .masked
                .addresses()
                .iter()
                .all(|&a| (a as usize) < map.cell_count()),
            || "address out of range".into(),
        )?;
        ensure(
            trace.response.len() == RESPONSE_BITS && RESPONSE_BITS == 128,
            || "response length".into(),
        )?;
        ensure(trace.response.to_string().len() == 128, || {
            "printed response length".into()
        })?;
        if k % 2 == 0 {
            let fresh = generate_response(&config, &id, &pw, map, &dev.power_up_read(k as u64))
                .map_err(|e| e.to_string())?;
            ensure(fresh.len() == 128, || "fresh response length".into())?;
        }
    }
    Ok(format!(
        "{n} random inputs: 256-byte digest, 128 addresses, 128-bit response"
    ))
}

fn brute_force(map: &TernaryMap, a: usize) -> Option<u16> {
    let n = map.cell_count();
    (0..n)
        .map(|k| (a + k) % n)
        .find(|&c| !map.states()[c].is_fuzzy())
        .map(|c| c as u16)
}

fn masking_oracle() -> Check {
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    let t = Instant::now();
    let maps = 10_000;
    let mut fuzzy_hits = 0usize;
    for m in 0..maps {
        let states: Vec<CellState> = (0..32)
            .map(|_| match rng.gen_range(0..3) {
                0 => CellState::Stable0,
                1 => CellState::Stable1,
                _ => CellState::Fuzzy,
            })
            .collect();
        let map = TernaryMap::from_states(states, 200, [0; 16]).unwrap();
        let mut addrs = [0u16; ADDRESS_COUNT];
        for (j, a) in addrs.iter_mut().enumerate() {
            *a = (j % 32) as u16;
        }
        let list = AddressList::new(addrs);
        let all_fuzzy = map.fuzzy_count() == 32;
        match mask_addresses(&list, &map) {
            Ok(masked) => {
                ensure(!all_fuzzy, || format!("map {m}: all-fuzzy map was masked"))?;
                for (j, &got) in masked.addresses().iter().enumerate() {
                    let want = brute_force(&map, j % 32);
                    ensure(Some(got) == want, || {
                        format!("map {m} addr {}: {got} vs {want:?}", j % 32)
                    })?;
                    ensure(mask_address((j % 32) as u16, &map) == Ok(got), || {
                        "single vs list".into()
                    })?;
                    if map.states()[got as usize].is_fuzzy() {
                        fuzzy_hits += 1;
                    }
                }
            }
            Err(Error::Unmaskable) => {
                ensure(all_fuzzy, || format!("map {m}: spurious Unmaskable"))?
            }
            Err(e) => return Err(format!("map {m}: {e}")),
        }
    }
    let elapsed = t.elapsed();
    ensure(fuzzy_hits == 0, || format!("{fuzzy_hits} fuzzy hits"))?;
    ensure(elapsed < Duration::from_secs(5), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{maps} maps x 32 starts match brute force, 0 fuzzy hits, {elapsed:?}"
    ))
}

fn round_trip() -> Check {
    let t = Instant::now();
    let mut rng = StdRng::seed_from_u64(0x5eed_0007);
    let config = ApgConfig::default();
    let creds: Vec<(Vec<u8>, Vec<u8>)> = (0..100)
        .map(|i| {
            let pw: Vec<u8> = (0..rng.gen_range(1..=24))
                .map(|_| rng.gen_range(0x21..0x7f))
                .collect();
            (format!("user{i}").into_bytes(), pw)
        })
        .collect();

    let mut summary = Vec::new();
    for (label, model, check_wrong) in [
        ("ideal", BiasModel::IDEAL, true),
        ("default", BiasModel::default(), false),
    ] {
        let dev = SramPufDevice::build(65536, &model, 7).unwrap();
        let map = enroll(&dev, 200, 0).unwrap();
        let mut vault = Vault::new(map.device_id());
        for (id, pw) in &creds {
            vault
                .enroll_user(&config, id, pw, &map, 0)
                .map_err(|e| e.to_string())?;
        }
        let mut accepts = 0;
        let mut rejects = 0;
        for (k, (id, pw)) in creds.iter().enumerate() {
            let seed = 10_000 + k as u64;
            if vault
                .authenticate(&config, id, pw, &dev, &map, seed)
                .map_err(|e| e.to_string())?
                .is_accept()
            {
                accepts += 1;
            }
            if check_wrong {
                let mut wrong = pw.clone();
                wrong.push(b'!');
                if !vault
                    .authenticate(&config, id, &wrong, &dev, &map, seed + 500)
                    .map_err(|e| e.to_string())?
                    .is_accept()
                {
                    rejects += 1;
                }
            }
        }
        ensure(accepts == 100, || format!("{label}: {accepts}/100 accepts"))?;
        if check_wrong {
            ensure(rejects == 100, || format!("{label}: {rejects}/100 rejects"))?;
            summary.push(format!("{label} {accepts}/100 accept {rejects}/100 reject"));
        } else {
            summary.push(format!(
                "{label} (noise {:.4}) {accepts}/100 accept",
                map.puf_noise()
            ));
        }
    }
    let elapsed = t.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("{}, {elapsed:?}", summary.join("; ")))
}

fn noise_metric() -> Check {
    for (fuzzy, total, want) in [(0usize, 100usize, 0.0f64), (5, 100, 0.05), (100, 100, 1.0)] {
        let states = (0..total)
            .map(|i| {
                if i < fuzzy {
                    CellState::Fuzzy
                } else {
                    CellState::Stable1
                }
            })
            .collect();
        let map = TernaryMap::from_states(states, 200, [0; 16]).unwrap();
        let got = map.puf_noise();
        ensure(got == want, || format!("{fuzzy}/{total}: {got}"))?;
        ensure(
            got == map.fuzzy_count() as f64 / map.cell_count() as f64,
            || "definition".into(),
        )?;
    }
    Ok("0.0, 0.05, 1.0 exact".into())
}

fn uniqueness() -> Check {
    let t = Instant::now();
    let study = inter_device_study(
        &BiasModel::default(),
        &ApgConfig::default(),
        ID,
        PW,
        &InterParams::default(),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let mean = study.hd_mean();
    ensure(study.rows.len() == 100, || "pair count".into())?;
    ensure((0.4..=0.6).contains(&mean), || format!("mean {mean:.4}"))?;
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "100 pairs, mean {mean:.4}, std {:.4}, {elapsed:?}",
        study.hd_std()
    ))
}

fn wire_fuzz() -> Check {
    let dev = SramPufDevice::build(65536, &BiasModel::default(), 10).unwrap();
    let map = enroll(&dev, 200, 0).unwrap();
    let vault = Vault::new(map.device_id());
    let service = Arc::new(
        Service::new(ApgConfig::default(), dev, map, vault, 0, None).map_err(|e| e.to_string())?,
    );
    let listener = wire::bind("127.0.0.1:0").map_err(|e| e.to_string())?;
    let addr = listener.local_addr().map_err(|e| e.to_string())?;
    let server = Arc::clone(&service);
    thread::spawn(move || wire::serve(server, listener));

    let stream = TcpStream::connect(addr).map_err(|e| e.to_string())?;
    let reader = BufReader::new(stream.try_clone().map_err(|e| e.to_string())?);
    let lines = 10_000;
    let mut writer = stream;
    let sender = thread::spawn(move || -> std::io::Result<()> {
        let mut rng = StdRng::seed_from_u64(0x5eed_0010);
        let mut buf = Vec::new();
        for _ in 0..lines {
            buf.clear();
            let len = rng.gen_range(0..=1024);
            buf.extend((0..len).map(|_| loop {
                let b: u8 = rng.gen();
                if b != b'\n' {
                    break b;
                }
            }));
            buf.push(b'\n');
            writer.write_all(&buf)?;
        }
        writer.write_all(b"PING\n")?;
        writer.flush()
    });

    let mut replies = 0usize;
    let mut line = String::new();
    let mut reader = reader;
    for _ in 0..lines {
        line.clear();
        reader
            .read_line(&mut line)
            .map_err(|e| format!("after {replies} replies: {e}"))?;
        ensure(line.ends_with('\n'), || {
            format!("connection closed after {replies} replies")
        })?;
        ensure(
            WireResponse::parse(line.trim_end_matches('\n')).is_some(),
            || format!("bad reply {line:?}"),
        )?;
        replies += 1;
    }
    line.clear();
    reader.read_line(&mut line).map_err(|e| e.to_string())?;
    ensure(line == "OK\n", || {
        format!("service not answering PING after fuzz: {line:?}")
    })?;
    sender
        .join()
        .map_err(|_| "sender panicked".to_string())?
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "{lines} fuzzed lines, {replies} replies, service alive"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("rotation golden", rotation),
        ("expander golden", expander),
        ("SHA-256 conformance", sha256_vectors),
        ("terminal transcript", transcript),
        ("pipeline shape", pipeline_shape),
        ("masking oracle", masking_oracle),
        ("round-trip authentication", round_trip),
        ("noise metric", noise_metric),
        ("uniqueness", uniqueness),
        ("wire robustness", wire_fuzz),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let elapsed = t.elapsed();
        match result {
            Ok(detail) => println!(
                "criterion {:>2} PASS  {name}: {detail} [{elapsed:.2?}]",
                i + 1
            ),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} [{elapsed:.2?}]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
