from coimg_harness.cli import console_main

console_main()
