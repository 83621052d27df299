from pidp.cli import main

raise SystemExit(main())
