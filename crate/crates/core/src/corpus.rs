//! Example programs shipped with the library.

pub const ONETOONE: &str = include_str!("../corpus/onetoone.pgas");
pub const ONETOONE_BARE: &str = include_str!("../corpus/onetoone_bare.pgas");
pub const ONETOONE_WITH_WAIT: &str = include_str!("../corpus/onetoone_with_wait.pgas");
pub const PRODUCER_CONSUMER: &str = include_str!("../corpus/producer_consumer.pgas");
pub const GPI_TWO_QUEUES: &str = include_str!("../corpus/gpi_two_queues.pgas");
pub const RING3: &str = include_str!("../corpus/ring3.pgas");
pub const EMPTY: &str = include_str!("../corpus/empty.pgas");

/// `(file name, source)` for every program.
pub const ALL: &[(&str, &str)] = &[
    ("onetoone.pgas", ONETOONE),
    ("onetoone_bare.pgas", ONETOONE_BARE),
    ("onetoone_with_wait.pgas", ONETOONE_WITH_WAIT),
    ("producer_consumer.pgas", PRODUCER_CONSUMER),
    ("gpi_two_queues.pgas", GPI_TWO_QUEUES),
    ("ring3.pgas", RING3),
    ("empty.pgas", EMPTY),
];
