# Subcommand modules; each exposes register(subparsers, parents)
