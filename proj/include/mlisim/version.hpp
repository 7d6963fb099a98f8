#pragma once

#define MLISIM_VERSION "0.1.0"
