pub mod hankel;
pub mod moments;
pub mod painleve;
pub mod verify;
