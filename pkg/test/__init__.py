# 使 test 目录成为包。内容可以为空。