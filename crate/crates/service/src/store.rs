use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use axum::http::StatusCode;
use tunespace::SearchSpace;
use tunespace_client::api::ErrorKind;
use uuid::Uuid;

use crate::ApiError;

/// A resolved space and the number of user constraints it came from.
pub struct Session {
    pub space: SearchSpace,
    pub num_constraints: usize,
}

pub(crate) struct Store {
    capacity: usize,
    spaces: RwLock<HashMap<Uuid, Arc<Session>>>,
}

impl Store {
    pub fn new(capacity: usize) -> Self {
        Store {
            capacity,
            spaces: RwLock::new(HashMap::new()),
        }
    }

    pub fn insert(&self, session: Session) -> Result<Uuid, ApiError> {
        let mut spaces = self.spaces.write().expect("space store poisoned");
        if spaces.len() >= self.capacity {
            return Err(ApiError::new(
                StatusCode::SERVICE_UNAVAILABLE,
                ErrorKind::Capacity,
                format!("{} spaces already held; delete one first", spaces.len()),
            ));
        }
        let id = Uuid::new_v4();
        spaces.insert(id, Arc::new(session));
        Ok(id)
    }

    pub fn get(&self, id: Uuid) -> Result<Arc<Session>, ApiError> {
        self.spaces
            .read()
            .expect("space store poisoned")
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::not_found(format!("no space {id}")))
    }

    pub fn remove(&self, id: Uuid) -> Result<(), ApiError> {
        match self.spaces.write().expect("space store poisoned").remove(&id) {
            Some(_) => Ok(()),
            None => Err(ApiError::not_found(format!("no space {id}"))),
        }
    }

    pub fn len(&self) -> usize {
        self.spaces.read().expect("space store poisoned").len()
    }
}
