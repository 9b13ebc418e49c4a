from coimg.cli import console_main

console_main()
