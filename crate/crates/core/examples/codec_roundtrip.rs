//! Build a clip by hand, encode it to the `.thrm` container and read it back.

use respiscreen::codec::{decode_clip, decode_header, encode_clip, CodecError};
use respiscreen::thermal::{Calibration, RadiometricClip, RadiometricFrame};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cal = Calibration::new(0.04, -273.15)?;
    let (w, h) = (4, 3);
    let frames = (0..5u16)
        .map(|i| {
            let counts = (0..(w * h) as u16).map(|p| 7500 + 10 * i + p).collect();
            RadiometricFrame::new(w, h, counts, u64::from(i) * 111_111)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let clip = RadiometricClip::new(w, h, 9.0, cal, frames)?;

    let bytes = encode_clip(&clip);
    let header = decode_header(&bytes)?;
    println!("{} bytes, header {header:?}", bytes.len());

    let back = decode_clip(&bytes)?;
    assert_eq!(back, clip);
    println!("round trip exact; pixel (0,0) of frame 4 = {:.2} °C", back.celsius_frame(4).at(0, 0));

    match decode_clip(&bytes[..bytes.len() - 1]) {
        Err(e @ CodecError::Truncated { .. }) => println!("cut one byte: {e}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}
