from chainmark.cli import main

main()
