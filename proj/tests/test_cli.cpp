#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>
int main(int argc,char**argv){doctest::Context ctx; ctx.applyCommandLine(argc>1?1:argc,argv); return ctx.run();}
