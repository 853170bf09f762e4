#include "emdict/hashing.hpp"
