# CLI sub-commands, one module per simulation engine
