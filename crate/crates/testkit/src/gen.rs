use rand::seq::SliceRandom;
use rand::Rng;

use sdds::{ArrayDef, ArrayInstance, DataMode, DataType, Dataset, Endian, FieldDef, Page, Schema, Value};

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_parameters: usize,
    pub max_arrays: usize,
    pub max_columns: usize,
    pub max_array_dims: usize,
    pub pages: (usize, usize),
    pub max_rows: usize,
    /// Only finite floats and short printable strings when set.
    pub tame: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_parameters: 4,
            max_arrays: 3,
            max_columns: 7,
            max_array_dims: 3,
            pages: (1, 5),
            max_rows: 100,
            tame: false,
        }
    }
}

const NAME_HEAD: &[u8] = b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
const NAME_TAIL: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_.:";

pub fn random_name<R: Rng>(rng: &mut R) -> String {
    let mut name = String::new();
    name.push(char::from(*NAME_HEAD.choose(rng).unwrap()));
    for _ in 0..rng.gen_range(0..6) {
        name.push(char::from(*NAME_TAIL.choose(rng).unwrap()));
    }
    name
}

fn unique_names<R: Rng>(rng: &mut R, n: usize) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    while names.len() < n {
        let name = random_name(rng);
        if !names.contains(&name) {
            names.push(name);
        }
    }
    names
}

const TEXT_POOL: &[char] = &[
    'a', 'b', 'z', 'Q', '0', '9', ' ', '"', '\\', '!', '\n', '\t', '\r', '\u{0}', '\u{7f}', '&', ',', '=',
    'é', 'µ', '中', '😀', '\u{a0}', '\u{85}', 'x',
];

pub fn random_header_text<R: Rng>(rng: &mut R) -> Option<String> {
    const POOL: &[u8] = b"ab Z09_-,\"&!=\\\n\tm/s";
    rng.gen_bool(0.4).then(|| {
        (0..rng.gen_range(0..8))
            .map(|_| char::from(*POOL.choose(rng).unwrap()))
            .collect()
    })
}

pub fn random_string<R: Rng>(rng: &mut R, tame: bool) -> String {
    let len = rng.gen_range(0..8);
    if tame {
        return (0..len).map(|_| char::from(rng.gen_range(b'a'..=b'e'))).collect();
    }
    (0..len).map(|_| *TEXT_POOL.choose(rng).unwrap()).collect()
}

fn random_f64<R: Rng>(rng: &mut R, tame: bool) -> f64 {
    loop {
        let v = match rng.gen_range(0..4) {
            0 => f64::from_bits(rng.gen()),
            1 => rng.gen_range(-1e6..1e6),
            2 => f64::from(rng.gen_range(-100i32..100)) / 10.0,
            _ => *[
                0.0,
                -0.0,
                0.1,
                1.0,
                f64::MAX,
                f64::MIN_POSITIVE,
                5e-324,
                f64::INFINITY,
                f64::NAN,
            ]
            .choose(rng)
            .unwrap(),
        };
        if !tame || v.is_finite() {
            return v;
        }
    }
}

fn random_f32<R: Rng>(rng: &mut R, tame: bool) -> f32 {
    loop {
        let v = match rng.gen_range(0..4) {
            0 => f32::from_bits(rng.gen()),
            1 => rng.gen_range(-1e6f32..1e6),
            2 => rng.gen_range(-100i16..100) as f32 / 10.0,
            _ => *[
                0.0f32,
                -0.0,
                0.1,
                1.0,
                f32::MAX,
                f32::MIN_POSITIVE,
                1e-45,
                f32::NEG_INFINITY,
                f32::NAN,
            ]
            .choose(rng)
            .unwrap(),
        };
        if !tame || v.is_finite() {
            return v;
        }
    }
}

pub fn random_value<R: Rng>(rng: &mut R, data_type: DataType, tame: bool) -> Value {
    match data_type {
        DataType::Short => Value::Short(rng.gen()),
        DataType::Long => Value::Long(if rng.gen_bool(0.5) {
            rng.gen()
        } else {
            rng.gen_range(-50..50)
        }),
        DataType::Long64 => Value::Long64(if rng.gen_bool(0.5) {
            rng.gen()
        } else {
            rng.gen_range(-50..50)
        }),
        DataType::Float => Value::Float(random_f32(rng, tame)),
        DataType::Double => Value::Double(random_f64(rng, tame)),
        DataType::String => Value::Str(random_string(rng, tame)),
        DataType::Character => Value::Char(if tame {
            rng.gen_range(b'a'..=b'e')
        } else {
            rng.gen()
        }),
    }
}

fn random_type<R: Rng>(rng: &mut R) -> DataType {
    *DataType::ALL.choose(rng).unwrap()
}

fn random_field<R: Rng>(rng: &mut R, name: String, tame: bool) -> FieldDef {
    let mut def = FieldDef::new(name, random_type(rng));
    if !tame {
        def.units = random_header_text(rng);
        def.description = random_header_text(rng);
    }
    def
}

pub fn random_schema<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Schema {
    let mode = if rng.gen_bool(0.5) {
        DataMode::Ascii
    } else {
        DataMode::Binary
    };
    let endian = if rng.gen_bool(0.5) {
        Endian::Little
    } else {
        Endian::Big
    };
    let mut schema = Schema::new(mode, endian);
    if !cfg.tame {
        schema.description_text = random_header_text(rng);
        schema.description_contents = random_header_text(rng);
    }
    let n = rng.gen_range(0..=cfg.max_parameters);
    for name in unique_names(rng, n) {
        schema.parameters.push(random_field(rng, name, cfg.tame));
    }
    let n = rng.gen_range(0..=cfg.max_arrays);
    for name in unique_names(rng, n) {
        let dims = rng.gen_range(1..=cfg.max_array_dims.max(1));
        schema
            .arrays
            .push(ArrayDef::new(random_field(rng, name, cfg.tame), dims));
    }
    let n = rng.gen_range(0..=cfg.max_columns);
    for name in unique_names(rng, n) {
        schema.columns.push(random_field(rng, name, cfg.tame));
    }
    schema
}

pub fn random_page<R: Rng>(rng: &mut R, schema: &Schema, cfg: &GenConfig) -> Page {
    let rows = rng.gen_range(0..=cfg.max_rows);
    Page {
        parameter_values: schema
            .parameters
            .iter()
            .map(|d| random_value(rng, d.data_type, cfg.tame))
            .collect(),
        array_values: schema
            .arrays
            .iter()
            .map(|a| {
                let dims: Vec<i32> = (0..a.dim_count).map(|_| rng.gen_range(0..4)).collect();
                let n: i32 = dims.iter().product();
                ArrayInstance::new(
                    dims,
                    (0..n)
                        .map(|_| random_value(rng, a.base.data_type, cfg.tame))
                        .collect(),
                )
            })
            .collect(),
        column_data: schema
            .columns
            .iter()
            .map(|d| {
                (0..rows)
                    .map(|_| random_value(rng, d.data_type, cfg.tame))
                    .collect()
            })
            .collect(),
        row_count: rows as i32,
    }
}

pub fn random_dataset<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Dataset {
    let schema = random_schema(rng, cfg);
    let pages = (0..rng.gen_range(cfg.pages.0..=cfg.pages.1))
        .map(|_| random_page(rng, &schema, cfg))
        .collect();
    Dataset { schema, pages }
}
